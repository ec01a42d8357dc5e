#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "stabilis/topology.hpp"

namespace stabilis {

/// Local state of one node: a distance estimate and a parent pointer.
/// The root's par is stored but never read by any action or predicate.
struct NodeState {
    std::uint64_t d = 0;
    NodeId par = 0;

    bool operator==(const NodeState&) const = default;
};

/// One state per node of the owning network.
struct Configuration {
    std::vector<NodeState> states;

    Configuration() = default;
    explicit Configuration(std::vector<NodeState> s) : states(std::move(s)) {}

    std::size_t size() const { return states.size(); }
    NodeState& operator[](NodeId p) { return states[p]; }
    const NodeState& operator[](NodeId p) const { return states[p]; }

    bool operator==(const Configuration&) const = default;
};

struct ConfigurationHash {
    std::size_t operator()(const Configuration& cfg) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        };
        for (const NodeState& s : cfg.states) {
            mix(s.d);
            mix(s.par);
        }
        return static_cast<std::size_t>(h);
    }
};

/// Builds the all-zero configuration with every par pointing at the node's
/// first neighbor (the root's par included, by convention).
inline Configuration zero_configuration(const Network& net) {
    Configuration cfg;
    cfg.states.resize(net.node_count());
    for (NodeId p = 0; p < net.node_count(); ++p) {
        cfg[p].par = net.neighbors(p).empty() ? p : net.neighbors(p).front();
    }
    return cfg;
}

enum class ActionKind { Root, CD, CP };

inline const char* to_string(ActionKind a) {
    switch (a) {
        case ActionKind::Root: return "Root";
        case ActionKind::CD: return "CD";
        case ActionKind::CP: return "CP";
    }
    return "?";
}

enum class StepClass { RootStep, DStep, ParStep };

inline const char* to_string(StepClass c) {
    switch (c) {
        case StepClass::RootStep: return "R";
        case StepClass::DStep: return "D";
        case StepClass::ParStep: return "P";
    }
    return "?";
}

struct EmptyNeighborhood : std::logic_error {
    using std::logic_error::logic_error;
};
struct NoWitness : std::logic_error {
    using std::logic_error::logic_error;
};
struct EmptyActivation : std::logic_error {
    using std::logic_error::logic_error;
};
struct NodeNotEnabled : std::logic_error {
    NodeId node;
    explicit NodeNotEnabled(NodeId p)
        : std::logic_error("node " + std::to_string(p) + " is not enabled"), node(p) {}
};

/// Dist_p: one more than the smallest neighbor distance estimate.
inline std::uint64_t dist_macro(const Network& net, const Configuration& cfg, NodeId p) {
    const auto& nbrs = net.neighbors(p);
    if (nbrs.empty()) throw EmptyNeighborhood("node " + std::to_string(p) + " has no neighbors");
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (NodeId q : nbrs) {
        if (cfg[q].d == std::numeric_limits<std::uint64_t>::max()) {
            throw std::overflow_error("distance estimate would wrap");
        }
        best = std::min(best, cfg[q].d + 1);
    }
    return best;
}

/// Par_dist: the first neighbor, in p's channel order, whose estimate is one
/// below p's own.
inline NodeId par_dist(const Network& net, const Configuration& cfg, NodeId p) {
    for (NodeId q : net.neighbors(p)) {
        if (cfg[q].d + 1 == cfg[p].d) return q;
    }
    throw NoWitness("no neighbor of " + std::to_string(p) + " sits one level below it");
}

/// The action p's guards enable in cfg, if any. CD and CP are mutually
/// exclusive: CP requires the distance estimate to already be locally correct.
inline std::optional<ActionKind> enabled_action(const Network& net, const Configuration& cfg,
                                                NodeId p) {
    if (net.is_root(p)) {
        if (cfg[p].d != 0) return ActionKind::Root;
        return std::nullopt;
    }
    const std::uint64_t want = dist_macro(net, cfg, p);
    if (cfg[p].d != want) return ActionKind::CD;
    if (cfg[cfg[p].par].d + 1 != cfg[p].d) return ActionKind::CP;
    return std::nullopt;
}

inline bool is_enabled(const Network& net, const Configuration& cfg, NodeId p) {
    return enabled_action(net, cfg, p).has_value();
}

/// All enabled nodes, ascending.
inline std::vector<NodeId> enabled_nodes(const Network& net, const Configuration& cfg) {
    std::vector<NodeId> out;
    for (NodeId p = 0; p < net.node_count(); ++p) {
        if (is_enabled(net, cfg, p)) out.push_back(p);
    }
    return out;
}

/// Executes one atomic step: every activated node runs its enabled action's
/// statement, all of them reading the pre-step configuration.
inline Configuration apply_step(const Network& net, const Configuration& cfg,
                                std::span<const NodeId> activated) {
    if (activated.empty()) throw EmptyActivation("a step must activate at least one node");
    Configuration next = cfg;
    for (NodeId p : activated) {
        auto action = enabled_action(net, cfg, p);
        if (!action) throw NodeNotEnabled(p);
        switch (*action) {
            case ActionKind::Root: next[p].d = 0; break;
            case ActionKind::CD: next[p].d = dist_macro(net, cfg, p); break;
            case ActionKind::CP: next[p].par = par_dist(net, cfg, p); break;
        }
    }
    return next;
}

/// Partition of legal steps: the root moved, some other estimate moved, or
/// only parent pointers moved.
inline StepClass classify_step(const Configuration& cfg, const Configuration& next, NodeId root) {
    if (cfg[root].d != next[root].d) return StepClass::RootStep;
    for (NodeId p = 0; p < cfg.size(); ++p) {
        if (cfg[p].d != next[p].d) return StepClass::DStep;
    }
    return StepClass::ParStep;
}

inline StepClass classify_step(const Network& net, const Configuration& cfg,
                               const Configuration& next) {
    return classify_step(cfg, next, net.root);
}

/// True when no node is enabled; such a configuration ends every execution.
inline bool is_terminal(const Network& net, const Configuration& cfg) {
    for (NodeId p = 0; p < net.node_count(); ++p) {
        if (is_enabled(net, cfg, p)) return false;
    }
    return true;
}

/// True when every estimate equals the true hop distance and every non-root
/// parent sits one level closer to the root, i.e. the parent pointers form a
/// breadth-first spanning tree.
inline bool is_legitimate(const Network& net, const Configuration& cfg) {
    if (cfg[net.root].d != 0) return false;
    const auto dist = dist_to_root(net);
    for (NodeId p = 0; p < net.node_count(); ++p) {
        if (cfg[p].d != dist[p]) return false;
        if (!net.is_root(p) && cfg[cfg[p].par].d + 1 != cfg[p].d) return false;
    }
    return true;
}

}  // namespace stabilis
