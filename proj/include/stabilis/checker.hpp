#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "stabilis/algorithm.hpp"
#include "stabilis/potentials.hpp"
#include "stabilis/topology.hpp"

namespace stabilis {

struct StateLimitExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DValueLimitExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GraphNotAcyclic : std::logic_error {
    using std::logic_error::logic_error;
};

/// Activation sets inside the step graph are bitmasks over node identifiers,
/// which caps explored networks at 32 nodes. Far beyond desk scale anyway.
using ActivationMask = std::uint32_t;

inline ActivationMask mask_of(std::span<const NodeId> nodes) {
    ActivationMask m = 0;
    for (NodeId p : nodes) m |= ActivationMask{1} << p;
    return m;
}

inline std::vector<NodeId> nodes_of(ActivationMask m) {
    std::vector<NodeId> out;
    for (NodeId p = 0; m != 0; ++p, m >>= 1) {
        if (m & 1) out.push_back(p);
    }
    return out;
}

struct StepEdge {
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    ActivationMask activated = 0;
    StepClass cls = StepClass::DStep;
};

/// The step relation restricted to the configurations reachable from a set
/// of initial configurations, under every daemon choice.
struct StepGraph {
    Network net;
    std::vector<Configuration> vertices;  // discovery order
    std::vector<StepEdge> edges;          // grouped by source, discovery order
    std::vector<std::uint32_t> roots;     // vertex indices of the initials
};

struct ExploreLimits {
    std::size_t max_states = 10'000'000;
    std::uint64_t max_d_observed = std::numeric_limits<std::uint64_t>::max();
};

/// Limits for a run whose initial estimates are bounded by d_max. Generous:
/// reachable estimates stay well below it, so hitting the cap means the step
/// semantics is broken, not that the instance is too big.
inline ExploreLimits default_limits(const Network& net, std::uint64_t d_max) {
    return ExploreLimits{10'000'000, d_max + net.node_count() + d_max};
}

/// Every configuration with estimates in [0, d_max] and every parent choice
/// among each non-root node's neighbors; the root's parent is pinned to its
/// first neighbor. Emitted in odometer order, estimates cycling fastest.
inline std::vector<Configuration> enumerate_initial_configs(const Network& net,
                                                            std::uint64_t d_max) {
    const std::size_t n = net.node_count();
    std::vector<Configuration> out;
    std::vector<std::size_t> par_idx(n, 0);
    Configuration base = zero_configuration(net);
    while (true) {
        // Non-root parent pointers for this odometer position.
        Configuration cfg = base;
        for (NodeId p = 0; p < n; ++p) {
            if (!net.is_root(p)) cfg[p].par = net.neighbors(p)[par_idx[p]];
        }
        std::vector<std::uint64_t> d(n, 0);
        while (true) {
            for (NodeId p = 0; p < n; ++p) cfg[p].d = d[p];
            out.push_back(cfg);
            std::size_t i = n;
            while (i > 0) {
                --i;
                if (d[i] < d_max) {
                    ++d[i];
                    std::fill(d.begin() + static_cast<std::ptrdiff_t>(i) + 1, d.end(), 0);
                    break;
                }
                if (i == 0) goto d_done;
            }
        }
    d_done:;
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (net.is_root(i)) continue;
            if (par_idx[i] + 1 < net.neighbors(static_cast<NodeId>(i)).size()) {
                ++par_idx[i];
                for (std::size_t j = i + 1; j < n; ++j) par_idx[j] = 0;
                break;
            }
            par_idx[i] = 0;
            if (i == 0) break;
        }
        bool wrapped = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (par_idx[j] != 0) wrapped = false;
        }
        if (wrapped) break;
    }
    return out;
}

/// Breadth-first closure of the step relation under all daemon choices:
/// from every reached configuration, every non-empty subset of the enabled
/// nodes is taken. Deduplicates configurations globally.
inline StepGraph explore(const Network& net, const std::vector<Configuration>& initials,
                         const ExploreLimits& limits) {
    if (net.node_count() > 32) {
        throw std::invalid_argument("explore supports networks of at most 32 nodes");
    }
    StepGraph g;
    g.net = net;
    std::unordered_map<Configuration, std::uint32_t, ConfigurationHash> index;
    auto check_d = [&limits](const Configuration& cfg) {
        for (const NodeState& s : cfg.states) {
            if (s.d > limits.max_d_observed) {
                throw DValueLimitExceeded("estimate " + std::to_string(s.d) +
                                          " above the diagnostic cap " +
                                          std::to_string(limits.max_d_observed));
            }
        }
    };
    auto intern = [&](const Configuration& cfg) -> std::uint32_t {
        auto it = index.find(cfg);
        if (it != index.end()) return it->second;
        if (g.vertices.size() >= limits.max_states) {
            throw StateLimitExceeded("more than " + std::to_string(limits.max_states) +
                                     " configurations reached");
        }
        check_d(cfg);
        const auto id = static_cast<std::uint32_t>(g.vertices.size());
        g.vertices.push_back(cfg);
        index.emplace(cfg, id);
        return id;
    };
    for (const Configuration& cfg : initials) {
        std::uint32_t id = intern(cfg);
        if (std::find(g.roots.begin(), g.roots.end(), id) == g.roots.end()) g.roots.push_back(id);
    }
    // The vertex vector doubles as the BFS queue: vertices are processed in
    // discovery order and new ones are appended past the cursor.
    for (std::uint32_t v = 0; v < g.vertices.size(); ++v) {
        const std::vector<NodeId> enabled = enabled_nodes(net, g.vertices[v]);
        if (enabled.empty()) continue;
        const std::uint64_t subsets = std::uint64_t{1} << enabled.size();
        for (std::uint64_t choice = 1; choice < subsets; ++choice) {
            std::vector<NodeId> activated;
            for (std::size_t i = 0; i < enabled.size(); ++i) {
                if (choice >> i & 1) activated.push_back(enabled[i]);
            }
            const Configuration next = apply_step(net, g.vertices[v], activated);
            const StepClass cls = classify_step(net, g.vertices[v], next);
            const std::uint32_t w = intern(next);
            g.edges.push_back({v, w, mask_of(activated), cls});
        }
    }
    return g;
}

struct ConvergenceResult {
    bool acyclic = false;
    bool all_sinks_legitimate = false;
};

namespace detail {

/// Kahn topological order of the step graph; empty when the graph has a cycle.
inline std::vector<std::uint32_t> topological_order(const StepGraph& g) {
    const std::size_t n = g.vertices.size();
    std::vector<std::uint32_t> indegree(n, 0);
    for (const StepEdge& e : g.edges) ++indegree[e.target];
    std::vector<std::vector<std::uint32_t>> succ(n);
    for (const StepEdge& e : g.edges) succ[e.source].push_back(e.target);
    std::vector<std::uint32_t> order;
    order.reserve(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (indegree[v] == 0) order.push_back(v);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (std::uint32_t w : succ[order[head]]) {
            if (--indegree[w] == 0) order.push_back(w);
        }
    }
    if (order.size() != n) order.clear();
    return order;
}

}  // namespace detail

/// The two halves of convergence at desk scale: the explored step relation
/// admits no cycle, and every dead end is a breadth-first spanning tree.
inline ConvergenceResult verify_convergence(const StepGraph& g) {
    ConvergenceResult result;
    result.acyclic = g.vertices.empty() || !detail::topological_order(g).empty();
    std::vector<bool> has_out(g.vertices.size(), false);
    for (const StepEdge& e : g.edges) has_out[e.source] = true;
    result.all_sinks_legitimate = true;
    for (std::uint32_t v = 0; v < g.vertices.size(); ++v) {
        if (!has_out[v] && !is_legitimate(g.net, g.vertices[v])) {
            result.all_sinks_legitimate = false;
            break;
        }
    }
    return result;
}

/// Number of steps on the longest execution recorded in the graph, from any
/// initial configuration down to a terminal one.
inline std::uint64_t worst_case_steps(const StepGraph& g) {
    const std::vector<std::uint32_t> order = detail::topological_order(g);
    if (g.vertices.empty()) return 0;
    if (order.empty()) throw GraphNotAcyclic("the step graph has a cycle");
    std::vector<std::vector<std::uint32_t>> succ(g.vertices.size());
    for (const StepEdge& e : g.edges) succ[e.source].push_back(e.target);
    std::vector<std::uint64_t> longest(g.vertices.size(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        for (std::uint32_t w : succ[*it]) {
            longest[*it] = std::max(longest[*it], longest[w] + 1);
        }
    }
    std::uint64_t best = 0;
    for (std::uint32_t r : g.roots) best = std::max(best, longest[r]);
    return best;
}

/// One monitor per proof obligation, dispatched on the step's class.
enum class MonitorCheck {
    RootResetsToZero,
    ParPhiInvariant,
    ParCpDecreases,
    SmoothNsPreserved,
    SmoothSumIncreases,
    KStarNoNewLowRanks,
    KStarLowRanksPreserved,
    KStarWitnessResolves,
    KStarNsShrinks,
    NonSmoothPhiDecreases,
    BoxClosure,
    CompositeDecreases,
};

inline constexpr std::size_t kMonitorCheckCount = 12;

inline const char* to_string(MonitorCheck c) {
    switch (c) {
        case MonitorCheck::RootResetsToZero: return "root_resets_to_zero";
        case MonitorCheck::ParPhiInvariant: return "par_phi_invariant";
        case MonitorCheck::ParCpDecreases: return "par_cp_decreases";
        case MonitorCheck::SmoothNsPreserved: return "smooth_ns_preserved";
        case MonitorCheck::SmoothSumIncreases: return "smooth_sum_increases";
        case MonitorCheck::KStarNoNewLowRanks: return "kstar_no_new_low_ranks";
        case MonitorCheck::KStarLowRanksPreserved: return "kstar_low_ranks_preserved";
        case MonitorCheck::KStarWitnessResolves: return "kstar_witness_resolves";
        case MonitorCheck::KStarNsShrinks: return "kstar_ns_shrinks";
        case MonitorCheck::NonSmoothPhiDecreases: return "nonsmooth_phi_decreases";
        case MonitorCheck::BoxClosure: return "box_closure";
        case MonitorCheck::CompositeDecreases: return "composite_decreases";
    }
    return "?";
}

/// Outcome of the checks that apply to one step.
struct StepVerdict {
    std::vector<std::pair<MonitorCheck, bool>> checks;

    bool all_passed() const {
        for (const auto& [check, ok] : checks) {
            if (!ok) return false;
        }
        return true;
    }
};

/// Re-derives every proof obligation on a single legal step. The potential
/// and the box are anchored at the step's own source configuration, which
/// always contains itself, so no phase bookkeeping is needed across steps.
inline StepVerdict monitor_step(const Network& net, const Configuration& source,
                                const Configuration& target) {
    StepVerdict verdict;
    auto record = [&verdict](MonitorCheck c, bool ok) { verdict.checks.emplace_back(c, ok); };
    const StepClass cls = classify_step(net, source, target);
    const NodeId root = net.root;

    if (cls == StepClass::RootStep) {
        record(MonitorCheck::RootResetsToZero,
               target[root].d == 0 && target[root].d < source[root].d);
        // Boxes differ across a root step, so each side is measured in its own.
        record(MonitorCheck::CompositeDecreases,
               composite_lt(composite_measure(net, target), composite_measure(net, source),
                            /*same_phase=*/false));
        return verdict;
    }

    const auto dist = dist_to_root(net);
    const DBounds box = bounds_of(net, source, dist);
    record(MonitorCheck::BoxClosure, in_box(box, target));
    const DPotential phi_source = d_potential(net, box, source);
    const DPotential phi_target = d_potential(net, box, target);

    if (cls == StepClass::ParStep) {
        record(MonitorCheck::ParPhiInvariant, phi_target == phi_source);
        record(MonitorCheck::ParCpDecreases, cp_count(net, target) < cp_count(net, source));
    } else if (step_smooth(net, source, target)) {
        record(MonitorCheck::SmoothNsPreserved,
               ns_by_rank(net, source) == ns_by_rank(net, target));
        record(MonitorCheck::SmoothSumIncreases,
               d_aggregates(target).sum_d > d_aggregates(source).sum_d);
    } else {
        const KStarResult ks = k_star(net, source, target);
        const auto edges = net.edges();
        bool no_new_low = true;
        for (Edge e : edges) {
            if (edge_rank(target, e) <= ks.k_star && !edge_smooth(target, e)) {
                no_new_low = no_new_low && !edge_smooth(source, e) &&
                             edge_rank(source, e) == edge_rank(target, e);
            }
        }
        record(MonitorCheck::KStarNoNewLowRanks, no_new_low);
        bool low_preserved = true;
        for (Edge e : edges) {
            if (edge_rank(source, e) < ks.k_star && !edge_smooth(source, e)) {
                low_preserved = low_preserved && !edge_smooth(target, e) &&
                                edge_rank(target, e) == edge_rank(source, e);
            }
        }
        record(MonitorCheck::KStarLowRanksPreserved, low_preserved);
        const auto at_kstar = ns_set(net, source, ks.k_star);
        bool witness_ok = std::binary_search(at_kstar.begin(), at_kstar.end(), ks.witness) &&
                          (edge_smooth(target, ks.witness) ||
                           edge_rank(target, ks.witness) > ks.k_star);
        record(MonitorCheck::KStarWitnessResolves, witness_ok);
        bool shrinks = true;
        for (std::uint64_t k = phi_source.ns.k_lo; k < ks.k_star; ++k) {
            shrinks = shrinks && ns_set(net, source, k) == ns_set(net, target, k);
        }
        const auto target_at_kstar = ns_set(net, target, ks.k_star);
        shrinks = shrinks && target_at_kstar != at_kstar &&
                  std::includes(at_kstar.begin(), at_kstar.end(), target_at_kstar.begin(),
                                target_at_kstar.end());
        record(MonitorCheck::KStarNsShrinks, shrinks);
        record(MonitorCheck::NonSmoothPhiDecreases, d_potential_lt(phi_target, phi_source));
    }

    const CompositeMeasure m_source{source[root].d, phi_source, cp_count(net, source)};
    const CompositeMeasure m_target{target[root].d, phi_target, cp_count(net, target)};
    record(MonitorCheck::CompositeDecreases, composite_lt(m_target, m_source,
                                                          /*same_phase=*/true));
    return verdict;
}

struct MonitorCounterexample {
    std::size_t edge_index = 0;
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    ActivationMask activated = 0;
};

struct CheckStats {
    std::uint64_t passes = 0;
    std::uint64_t violations = 0;
    std::optional<MonitorCounterexample> first_counterexample;
};

struct MonitorReport {
    std::array<CheckStats, kMonitorCheckCount> checks{};

    CheckStats& stats(MonitorCheck c) { return checks[static_cast<std::size_t>(c)]; }
    const CheckStats& stats(MonitorCheck c) const { return checks[static_cast<std::size_t>(c)]; }

    std::uint64_t total_violations() const {
        std::uint64_t total = 0;
        for (const CheckStats& s : checks) total += s.violations;
        return total;
    }

    bool all_passed() const { return total_violations() == 0; }

    /// Folds a second report in; "first" counterexamples are kept by lowest
    /// edge index, so merging chunk reports in order is deterministic.
    void merge(const MonitorReport& other) {
        for (std::size_t i = 0; i < checks.size(); ++i) {
            checks[i].passes += other.checks[i].passes;
            checks[i].violations += other.checks[i].violations;
            const auto& theirs = other.checks[i].first_counterexample;
            auto& ours = checks[i].first_counterexample;
            if (theirs && (!ours || theirs->edge_index < ours->edge_index)) ours = theirs;
        }
    }
};

/// Runs every step monitor on every edge of the graph. Edges are pure,
/// independent checks, so they are chunked across jobs; the merged report is
/// identical whatever the job count.
inline MonitorReport run_monitors(const StepGraph& g, std::size_t jobs = 1) {
    const std::size_t edge_count = g.edges.size();
    if (jobs == 0) jobs = 1;
    jobs = std::min(jobs, std::max<std::size_t>(edge_count, 1));
    auto run_range = [&g](std::size_t lo, std::size_t hi, MonitorReport& report) {
        for (std::size_t i = lo; i < hi; ++i) {
            const StepEdge& e = g.edges[i];
            const StepVerdict verdict =
                monitor_step(g.net, g.vertices[e.source], g.vertices[e.target]);
            for (const auto& [check, ok] : verdict.checks) {
                CheckStats& s = report.stats(check);
                if (ok) {
                    ++s.passes;
                } else {
                    ++s.violations;
                    if (!s.first_counterexample) {
                        s.first_counterexample =
                            MonitorCounterexample{i, e.source, e.target, e.activated};
                    }
                }
            }
        }
    };
    if (jobs == 1) {
        MonitorReport report;
        run_range(0, edge_count, report);
        return report;
    }
    std::vector<MonitorReport> partial(jobs);
    std::vector<std::thread> workers;
    const std::size_t chunk = (edge_count + jobs - 1) / jobs;
    for (std::size_t j = 0; j < jobs; ++j) {
        const std::size_t lo = j * chunk;
        const std::size_t hi = std::min(edge_count, lo + chunk);
        workers.emplace_back([&run_range, &partial, j, lo, hi] { run_range(lo, hi, partial[j]); });
    }
    for (std::thread& t : workers) t.join();
    MonitorReport report;
    for (const MonitorReport& p : partial) report.merge(p);
    return report;
}

/// Graphviz rendering of the step graph. Vertices show the estimate vector,
/// edges show the activated set and the step class.
inline void write_dot(const StepGraph& g, std::ostream& out) {
    out << "digraph steps {\n";
    for (std::uint32_t v = 0; v < g.vertices.size(); ++v) {
        out << "  v" << v << " [label=\"";
        const Configuration& cfg = g.vertices[v];
        for (std::size_t p = 0; p < cfg.size(); ++p) {
            if (p != 0) out << ",";
            out << cfg[p].d;
        }
        out << "\"";
        if (std::find(g.roots.begin(), g.roots.end(), v) != g.roots.end()) {
            out << " shape=box";
        }
        if (is_terminal(g.net, cfg)) out << " peripheries=2";
        out << "];\n";
    }
    for (const StepEdge& e : g.edges) {
        out << "  v" << e.source << " -> v" << e.target << " [label=\"{";
        const std::vector<NodeId> ids = nodes_of(e.activated);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i != 0) out << ",";
            out << ids[i];
        }
        out << "}:" << to_string(e.cls) << "\"];\n";
    }
    out << "}\n";
}

}  // namespace stabilis
