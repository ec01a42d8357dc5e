#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "stabilis/algorithm.hpp"
#include "stabilis/topology.hpp"

namespace stabilis {

struct NotADStep : std::logic_error {
    using std::logic_error::logic_error;
};
struct NotNonSmoothDStep : std::logic_error {
    using std::logic_error::logic_error;
};
struct K0Mismatch : std::logic_error {
    using std::logic_error::logic_error;
};

struct DAggregates {
    std::uint64_t min_d = 0;
    std::uint64_t max_d = 0;
    std::uint64_t sum_d = 0;  // multiset sum: duplicates count

    bool operator==(const DAggregates&) const = default;
};

inline DAggregates d_aggregates(const Configuration& cfg) {
    DAggregates agg{cfg[0].d, cfg[0].d, 0};
    for (const NodeState& s : cfg.states) {
        agg.min_d = std::min(agg.min_d, s.d);
        agg.max_d = std::max(agg.max_d, s.d);
        agg.sum_d += s.d;
    }
    return agg;
}

/// Pointwise order on distance estimates.
inline bool d_le(const Configuration& a, const Configuration& b) {
    for (NodeId p = 0; p < a.size(); ++p) {
        if (a[p].d > b[p].d) return false;
    }
    return true;
}

/// Floor configuration: every estimate flattened to the configuration's
/// minimum. Parent pointers are copied unchanged.
inline Configuration bottom_of(const Configuration& cfg) {
    Configuration bot = cfg;
    const std::uint64_t lo = d_aggregates(cfg).min_d;
    for (NodeState& s : bot.states) s.d = lo;
    return bot;
}

/// Ceiling configuration: the root keeps its estimate; every other node gets
/// the larger of its own estimate and one above the smallest ceiling among
/// neighbors one hop closer to the root. Nodes are processed by increasing
/// hop distance, which is exactly how far the recursion can reach.
inline Configuration top_of(const Network& net, const Configuration& cfg,
                            std::span<const std::uint32_t> dist) {
    const std::size_t n = net.node_count();
    std::vector<NodeId> order(n);
    for (NodeId p = 0; p < n; ++p) order[p] = p;
    std::sort(order.begin(), order.end(),
              [&dist](NodeId x, NodeId y) { return dist[x] < dist[y]; });
    Configuration top = cfg;
    for (NodeId p : order) {
        if (net.is_root(p)) continue;
        std::uint64_t closest = std::numeric_limits<std::uint64_t>::max();
        for (NodeId q : net.neighbors(p)) {
            if (dist[q] + 1 == dist[p]) closest = std::min(closest, top[q].d);
        }
        top[p].d = std::max(cfg[p].d, closest + 1);
    }
    return top;
}

inline Configuration top_of(const Network& net, const Configuration& cfg) {
    return top_of(net, cfg, dist_to_root(net));
}

/// The envelope of everything reachable from one configuration by steps that
/// leave the root alone.
struct DBounds {
    Configuration bot;
    Configuration top;
};

inline DBounds bounds_of(const Network& net, const Configuration& cfg,
                         std::span<const std::uint32_t> dist) {
    return DBounds{bottom_of(cfg), top_of(net, cfg, dist)};
}

inline DBounds bounds_of(const Network& net, const Configuration& cfg) {
    return bounds_of(net, cfg, dist_to_root(net));
}

inline bool in_box(const DBounds& bounds, const Configuration& cfg) {
    return d_le(bounds.bot, cfg) && d_le(cfg, bounds.top);
}

/// Number of nodes whose enabled action is the parent repair.
inline std::size_t cp_count(const Network& net, const Configuration& cfg) {
    std::size_t count = 0;
    for (NodeId p = 0; p < net.node_count(); ++p) {
        if (enabled_action(net, cfg, p) == ActionKind::CP) ++count;
    }
    return count;
}

/// An edge is smooth when its endpoint estimates differ by at most one.
inline bool edge_smooth(const Configuration& cfg, Edge e) {
    const std::uint64_t x = cfg[e.a].d;
    const std::uint64_t y = cfg[e.b].d;
    return (x > y ? x - y : y - x) <= 1;
}

inline std::uint64_t edge_rank(const Configuration& cfg, Edge e) {
    return std::min(cfg[e.a].d, cfg[e.b].d);
}

namespace detail {

inline std::vector<NodeId> d_changed_nodes(const Configuration& cfg, const Configuration& next) {
    std::vector<NodeId> moved;
    for (NodeId p = 0; p < cfg.size(); ++p) {
        if (cfg[p].d != next[p].d) moved.push_back(p);
    }
    return moved;
}

}  // namespace detail

/// A d-step is smooth when every node whose estimate moved touches smooth
/// edges only in the source configuration.
inline bool step_smooth(const Network& net, const Configuration& cfg, const Configuration& next) {
    if (classify_step(net, cfg, next) != StepClass::DStep) {
        throw NotADStep("step does not change a non-root distance estimate");
    }
    for (NodeId p : detail::d_changed_nodes(cfg, next)) {
        for (NodeId q : net.neighbors(p)) {
            if (!edge_smooth(cfg, Edge{p, q})) return false;
        }
    }
    return true;
}

struct KStarResult {
    std::uint64_t k_star;
    Edge witness;  // canonically-first edge achieving the minimum
};

/// The lowest rank among source-non-smooth edges touched by the step, plus a
/// concrete edge realizing it. Only defined for non-smooth d-steps.
inline KStarResult k_star(const Network& net, const Configuration& cfg,
                          const Configuration& next) {
    if (classify_step(net, cfg, next) != StepClass::DStep) {
        throw NotNonSmoothDStep("step does not change a non-root distance estimate");
    }
    std::vector<bool> moved(cfg.size(), false);
    for (NodeId p : detail::d_changed_nodes(cfg, next)) moved[p] = true;
    bool found = false;
    std::uint64_t best = 0;
    Edge witness{0, 0};
    // Edges arrive canonically sorted, so keeping the first minimum picks the
    // canonically-first witness.
    for (Edge e : net.edges()) {
        if (edge_smooth(cfg, e)) continue;
        if (!moved[e.a] && !moved[e.b]) continue;
        const std::uint64_t rank = edge_rank(cfg, e);
        if (!found || rank < best) {
            best = rank;
            witness = e;
            found = true;
        }
    }
    if (!found) throw NotNonSmoothDStep("every moved node touches smooth edges only");
    return KStarResult{best, witness};
}

/// Non-smooth edges of the given rank, canonically ordered.
inline std::vector<Edge> ns_set(const Network& net, const Configuration& cfg, std::uint64_t k) {
    std::vector<Edge> out;
    for (Edge e : net.edges()) {
        if (!edge_smooth(cfg, e) && edge_rank(cfg, e) == k) out.push_back(e);
    }
    return out;
}

/// All non-smooth edges grouped by rank; ranks with no edges are absent.
inline std::map<std::uint64_t, std::vector<Edge>> ns_by_rank(const Network& net,
                                                             const Configuration& cfg) {
    std::map<std::uint64_t, std::vector<Edge>> out;
    for (Edge e : net.edges()) {
        if (!edge_smooth(cfg, e)) out[edge_rank(cfg, e)].push_back(e);
    }
    return out;
}

/// A sequence of edge sets indexed by the dense rank interval K0.
struct RankedEdgeSets {
    std::uint64_t k_lo = 0;
    std::uint64_t k_hi = 0;
    std::vector<std::vector<Edge>> sets;  // sets[k - k_lo], each canonically sorted

    bool operator==(const RankedEdgeSets&) const = default;
};

/// The d-step potential: non-smooth edge sets per rank plus the estimate sum.
/// Depends on d fields only, never on parent pointers.
struct DPotential {
    RankedEdgeSets ns;
    std::uint64_t sum_d = 0;

    bool operator==(const DPotential&) const = default;
};

/// Evaluates the potential of cfg against the box of some anchor
/// configuration: K0 runs from the anchor's floor minimum to its ceiling
/// maximum. Ranks outside K0 cannot occur while cfg stays inside the box.
inline DPotential d_potential(const Network& net, const DBounds& bounds,
                              const Configuration& cfg) {
    DPotential phi;
    phi.ns.k_lo = d_aggregates(bounds.bot).min_d;
    phi.ns.k_hi = d_aggregates(bounds.top).max_d;
    phi.ns.sets.reserve(static_cast<std::size_t>(phi.ns.k_hi - phi.ns.k_lo) + 1);
    for (std::uint64_t k = phi.ns.k_lo; k <= phi.ns.k_hi; ++k) {
        phi.ns.sets.push_back(ns_set(net, cfg, k));
    }
    phi.sum_d = d_aggregates(cfg).sum_d;
    return phi;
}

/// Strict lexicographic order on rank-indexed edge-set sequences: equal below
/// some rank, strictly smaller (as a set) at it.
inline bool setlex_lt(const RankedEdgeSets& a, const RankedEdgeSets& b) {
    if (a.k_lo != b.k_lo || a.k_hi != b.k_hi) {
        throw K0Mismatch("edge-set sequences cover different rank intervals");
    }
    for (std::size_t i = 0; i < a.sets.size(); ++i) {
        if (a.sets[i] == b.sets[i]) continue;
        return std::includes(b.sets[i].begin(), b.sets[i].end(), a.sets[i].begin(),
                             a.sets[i].end());
    }
    return false;
}

/// Strict order on potentials. The sum comparison is reversed on purpose:
/// the potential shrinks as the estimate sum grows toward its ceiling.
inline bool d_potential_lt(const DPotential& a, const DPotential& b) {
    if (setlex_lt(a.ns, b.ns)) return true;
    return a.ns == b.ns && b.sum_d < a.sum_d;
}

/// The three-layer termination measure: root estimate, then the d-step
/// potential, then the count of pending parent repairs.
struct CompositeMeasure {
    std::uint64_t root_d = 0;
    DPotential d_pot;
    std::size_t cp = 0;
};

inline CompositeMeasure composite_measure(const Network& net, const Configuration& cfg,
                                          const DBounds& bounds) {
    return CompositeMeasure{cfg[net.root].d, d_potential(net, bounds, cfg), cp_count(net, cfg)};
}

/// Measures cfg in its own box; every configuration sits inside it.
inline CompositeMeasure composite_measure(const Network& net, const Configuration& cfg) {
    return composite_measure(net, cfg, bounds_of(net, cfg));
}

/// Layered strict order. The middle layer is only meaningful when both
/// measures were taken against a common anchor box, which the caller asserts
/// via same_phase; with same_phase false that layer is skipped.
inline bool composite_lt(const CompositeMeasure& m1, const CompositeMeasure& m2,
                         bool same_phase) {
    if (m1.root_d != m2.root_d) return m1.root_d < m2.root_d;
    if (same_phase && d_potential_lt(m1.d_pot, m2.d_pot)) return true;
    return m1.d_pot == m2.d_pot && m1.cp < m2.cp;
}

}  // namespace stabilis
