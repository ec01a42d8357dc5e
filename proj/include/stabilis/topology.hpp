#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabilis {

using NodeId = std::uint32_t;

/// Undirected edge stored canonically: a < b.
struct Edge {
    NodeId a;
    NodeId b;

    Edge(NodeId p, NodeId q) : a(std::min(p, q)), b(std::max(p, q)) {}

    auto operator<=>(const Edge&) const = default;
};

/// A rooted bidirectional network. Neighbor order is part of the network's
/// identity: it decides which parent wins a tie when a node repairs its
/// parent pointer.
struct Network {
    NodeId root = 0;
    std::vector<std::vector<NodeId>> adjacency;

    std::size_t node_count() const { return adjacency.size(); }

    const std::vector<NodeId>& neighbors(NodeId p) const { return adjacency[p]; }

    bool is_root(NodeId p) const { return p == root; }

    /// Canonical edge set: one entry per unordered neighbor pair, sorted.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (NodeId p = 0; p < adjacency.size(); ++p) {
            for (NodeId q : adjacency[p]) {
                if (p < q) out.emplace_back(p, q);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool operator==(const Network&) const = default;
};

enum class NetworkDefect {
    NoRoot,
    SelfLoop,
    DuplicateNeighbor,
    AsymmetricLink,
    NotConnected,
};

inline const char* to_string(NetworkDefect d) {
    switch (d) {
        case NetworkDefect::NoRoot: return "NoRoot";
        case NetworkDefect::SelfLoop: return "SelfLoop";
        case NetworkDefect::DuplicateNeighbor: return "DuplicateNeighbor";
        case NetworkDefect::AsymmetricLink: return "AsymmetricLink";
        case NetworkDefect::NotConnected: return "NotConnected";
    }
    return "?";
}

struct NetworkIssue {
    NetworkDefect defect;
    std::string detail;
};

/// Checks every structural invariant; nullopt means the network is valid.
inline std::optional<NetworkIssue> validate_network(const Network& net) {
    const std::size_t n = net.node_count();
    if (n == 0 || net.root >= n) {
        return NetworkIssue{NetworkDefect::NoRoot,
                            "root " + std::to_string(net.root) + " is not a node"};
    }
    for (NodeId p = 0; p < n; ++p) {
        std::vector<bool> seen(n, false);
        for (NodeId q : net.adjacency[p]) {
            if (q >= n) {
                return NetworkIssue{NetworkDefect::AsymmetricLink,
                                    "node " + std::to_string(p) + " lists unknown node " +
                                        std::to_string(q)};
            }
            if (q == p) {
                return NetworkIssue{NetworkDefect::SelfLoop,
                                    "node " + std::to_string(p) + " lists itself"};
            }
            if (seen[q]) {
                return NetworkIssue{NetworkDefect::DuplicateNeighbor,
                                    "node " + std::to_string(p) + " lists " + std::to_string(q) +
                                        " twice"};
            }
            seen[q] = true;
            const auto& back = net.adjacency[q];
            if (std::find(back.begin(), back.end(), p) == back.end()) {
                return NetworkIssue{NetworkDefect::AsymmetricLink,
                                    std::to_string(q) + " listed under " + std::to_string(p) +
                                        " but not " + std::to_string(p) + " under " +
                                        std::to_string(q)};
            }
        }
    }
    // Connectivity from the root.
    std::vector<bool> reached(n, false);
    std::vector<NodeId> stack{net.root};
    reached[net.root] = true;
    std::size_t count = 0;
    while (!stack.empty()) {
        NodeId p = stack.back();
        stack.pop_back();
        ++count;
        for (NodeId q : net.adjacency[p]) {
            if (!reached[q]) {
                reached[q] = true;
                stack.push_back(q);
            }
        }
    }
    if (count != n) {
        return NetworkIssue{NetworkDefect::NotConnected,
                            std::to_string(n - count) + " node(s) unreachable from the root"};
    }
    return std::nullopt;
}

/// Hop distance of every node to the root (breadth-first search).
/// Requires a valid (connected) network.
inline std::vector<std::uint32_t> dist_to_root(const Network& net) {
    const std::size_t n = net.node_count();
    constexpr std::uint32_t unseen = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(n, unseen);
    std::queue<NodeId> frontier;
    dist[net.root] = 0;
    frontier.push(net.root);
    while (!frontier.empty()) {
        NodeId p = frontier.front();
        frontier.pop();
        for (NodeId q : net.adjacency[p]) {
            if (dist[q] == unseen) {
                dist[q] = dist[p] + 1;
                frontier.push(q);
            }
        }
    }
    return dist;
}

enum class NetworkKind { Path, Cycle, Star, Complete, Random };

inline std::optional<NetworkKind> network_kind_from_name(const std::string& name) {
    if (name == "path") return NetworkKind::Path;
    if (name == "cycle") return NetworkKind::Cycle;
    if (name == "star") return NetworkKind::Star;
    if (name == "complete") return NetworkKind::Complete;
    if (name == "random") return NetworkKind::Random;
    return std::nullopt;
}

struct InvalidSize : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void add_link(Network& net, NodeId p, NodeId q) {
    net.adjacency[p].push_back(q);
    net.adjacency[q].push_back(p);
}

inline void sort_adjacency(Network& net) {
    for (auto& nbrs : net.adjacency) std::sort(nbrs.begin(), nbrs.end());
}

}  // namespace detail

/// Builds a network of the requested shape with root = node 0 and neighbor
/// sequences in ascending order. Degenerate sizes collapse: cycle/star of
/// 1 or 2 nodes become the singleton or the single edge.
inline Network generate(NetworkKind kind, std::size_t n, std::uint64_t seed = 0) {
    if (n == 0) throw InvalidSize("network size must be at least 1");
    Network net;
    net.root = 0;
    net.adjacency.resize(n);
    switch (kind) {
        case NetworkKind::Path:
            for (NodeId i = 0; i + 1 < n; ++i) detail::add_link(net, i, i + 1);
            break;
        case NetworkKind::Cycle:
            for (NodeId i = 0; i + 1 < n; ++i) detail::add_link(net, i, i + 1);
            if (n >= 3) detail::add_link(net, 0, static_cast<NodeId>(n - 1));
            break;
        case NetworkKind::Star:
            for (NodeId i = 1; i < n; ++i) detail::add_link(net, 0, i);
            break;
        case NetworkKind::Complete:
            for (NodeId i = 0; i < n; ++i)
                for (NodeId j = i + 1; j < n; ++j) detail::add_link(net, i, j);
            break;
        case NetworkKind::Random: {
            // Spanning tree first, so the result is connected for every seed.
            std::mt19937_64 rng(seed);
            for (NodeId i = 1; i < n; ++i) {
                detail::add_link(net, static_cast<NodeId>(rng() % i), i);
            }
            std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
            for (NodeId p = 0; p < n; ++p)
                for (NodeId q : net.adjacency[p]) linked[p][q] = true;
            for (NodeId i = 0; i < n; ++i) {
                for (NodeId j = i + 1; j < n; ++j) {
                    if (!linked[i][j] && rng() % 4 == 0) detail::add_link(net, i, j);
                }
            }
            break;
        }
    }
    detail::sort_adjacency(net);
    return net;
}

/// Every labeled connected graph on 1..max_n nodes, root fixed to node 0,
/// neighbor sequences ascending. Enumerates edge subsets in increasing
/// bitmask order, so the output order is reproducible.
inline std::vector<Network> enumerate_networks(std::size_t max_n) {
    if (max_n == 0) throw InvalidSize("max_n must be at least 1");
    std::vector<Network> out;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<Edge> pairs;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        const std::uint64_t subsets = std::uint64_t{1} << pairs.size();
        for (std::uint64_t mask = 0; mask < subsets; ++mask) {
            Network net;
            net.root = 0;
            net.adjacency.resize(n);
            for (std::size_t e = 0; e < pairs.size(); ++e) {
                if (mask >> e & 1) detail::add_link(net, pairs[e].a, pairs[e].b);
            }
            detail::sort_adjacency(net);
            if (!validate_network(net)) out.push_back(std::move(net));
        }
    }
    return out;
}

}  // namespace stabilis
