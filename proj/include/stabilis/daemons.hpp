#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stabilis/algorithm.hpp"
#include "stabilis/topology.hpp"

namespace stabilis {

/// A daemon: given the enabled nodes (non-empty, ascending), pick which to
/// activate. Must return a non-empty subset of the enabled set. All built-in
/// strategies fit the unfair daemon: no fairness is enforced anywhere.
using DaemonStrategy = std::function<std::vector<NodeId>(
    const Network&, const Configuration&, const std::vector<NodeId>& enabled, std::mt19937_64&)>;

struct StrategyContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PlanStepIllegal : std::runtime_error {
    std::size_t index;
    PlanStepIllegal(std::size_t i, const std::string& what)
        : std::runtime_error("plan step " + std::to_string(i) + ": " + what), index(i) {}
};

enum class Outcome { Terminated, Truncated };

struct TraceStep {
    std::vector<NodeId> activated;  // ascending
    StepClass cls;
    Configuration config;

    bool operator==(const TraceStep&) const = default;
};

struct Trace {
    Configuration initial;
    std::vector<TraceStep> steps;
    Outcome outcome = Outcome::Terminated;
    std::size_t max_steps = 0;  // the cap the run was given

    const Configuration& final_config() const {
        return steps.empty() ? initial : steps.back().config;
    }

    // max_steps is bookkeeping about the run, not part of the trace identity.
    bool operator==(const Trace& other) const {
        return initial == other.initial && outcome == other.outcome && steps == other.steps;
    }
};

namespace detail {

// Bounded draws via modulo: reproducible across standard-library
// implementations, unlike uniform_int_distribution.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Activates every enabled node.
inline DaemonStrategy synchronous_strategy() {
    return [](const Network&, const Configuration&, const std::vector<NodeId>& enabled,
              std::mt19937_64&) { return enabled; };
}

/// Activates the least-identifier enabled node.
inline DaemonStrategy central_first_strategy() {
    return [](const Network&, const Configuration&, const std::vector<NodeId>& enabled,
              std::mt19937_64&) { return std::vector<NodeId>{enabled.front()}; };
}

/// Activates one enabled node, chosen uniformly.
inline DaemonStrategy central_random_strategy() {
    return [](const Network&, const Configuration&, const std::vector<NodeId>& enabled,
              std::mt19937_64& rng) {
        return std::vector<NodeId>{enabled[detail::pick(rng, enabled.size())]};
    };
}

/// Keeps each enabled node with probability p; falls back to a single
/// uniform pick when the coin flips leave the set empty.
inline DaemonStrategy random_subset_strategy(double p = 0.5) {
    return [p](const Network&, const Configuration&, const std::vector<NodeId>& enabled,
               std::mt19937_64& rng) {
        std::vector<NodeId> chosen;
        for (NodeId q : enabled) {
            if (detail::unit_draw(rng) < p) chosen.push_back(q);
        }
        if (chosen.empty()) chosen.push_back(enabled[detail::pick(rng, enabled.size())]);
        return chosen;
    };
}

/// Heuristic step-count stretcher: tries a bounded sample of activation
/// subsets and keeps the one whose successor has the most enabled nodes.
inline DaemonStrategy greedy_adversary_strategy(std::size_t sample_budget = 256) {
    return [sample_budget](const Network& net, const Configuration& cfg,
                           const std::vector<NodeId>& enabled, std::mt19937_64& rng) {
        const std::size_t k = enabled.size();
        auto subset_of = [&enabled](std::uint64_t mask) {
            std::vector<NodeId> s;
            for (std::size_t i = 0; i < enabled.size(); ++i) {
                if (mask >> i & 1) s.push_back(enabled[i]);
            }
            return s;
        };
        std::vector<std::uint64_t> masks;
        if (k < 64 && (std::uint64_t{1} << k) - 1 <= sample_budget) {
            for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) masks.push_back(m);
        } else {
            const std::uint64_t all = k >= 64 ? ~std::uint64_t{0}
                                              : (std::uint64_t{1} << k) - 1;
            for (std::size_t i = 0; i < sample_budget; ++i) masks.push_back(rng() % all + 1);
        }
        std::vector<NodeId> best;
        std::size_t best_score = 0;
        for (std::uint64_t m : masks) {
            auto s = subset_of(m);
            Configuration next = apply_step(net, cfg, s);
            std::size_t score = enabled_nodes(net, next).size();
            if (best.empty() || score > best_score) {
                best = std::move(s);
                best_score = score;
            }
        }
        return best;
    };
}

/// Replays a fixed activation plan. Throws PlanStepIllegal when a planned set
/// is not a non-empty subset of the enabled nodes, or when the plan runs out
/// before the driver stops asking.
inline DaemonStrategy scripted_strategy(std::vector<std::vector<NodeId>> plan) {
    auto cursor = std::make_shared<std::size_t>(0);
    auto shared_plan = std::make_shared<std::vector<std::vector<NodeId>>>(std::move(plan));
    return [cursor, shared_plan](const Network& net, const Configuration& cfg,
                                 const std::vector<NodeId>&, std::mt19937_64&) {
        if (*cursor >= shared_plan->size()) {
            throw PlanStepIllegal(*cursor, "plan exhausted before the execution stopped");
        }
        const auto& want = (*shared_plan)[*cursor];
        if (want.empty()) throw PlanStepIllegal(*cursor, "planned set is empty");
        for (NodeId p : want) {
            if (p >= net.node_count() || !is_enabled(net, cfg, p)) {
                throw PlanStepIllegal(*cursor, "node " + std::to_string(p) + " is not enabled");
            }
        }
        ++(*cursor);
        return want;
    };
}

/// The named parameterless strategies, for CLI lookup. random_subset uses
/// p = 0.5 here; scripted needs a plan and is built via scripted_strategy.
inline std::map<std::string, DaemonStrategy> builtin_strategies() {
    return {
        {"synchronous", synchronous_strategy()},
        {"central_first", central_first_strategy()},
        {"central_random", central_random_strategy()},
        {"random_subset", random_subset_strategy()},
        {"greedy_adversary", greedy_adversary_strategy()},
    };
}

/// Drives the system from cfg0 until a terminal configuration or max_steps.
/// Deterministic in (inputs, seed). Enforces the strategy contract on every
/// step and aborts with StrategyContractViolation when it is broken.
inline Trace run_execution(const Network& net, const Configuration& cfg0,
                           const DaemonStrategy& strategy, std::size_t max_steps,
                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Trace trace;
    trace.initial = cfg0;
    trace.max_steps = max_steps;
    Configuration cfg = cfg0;
    for (std::size_t step = 0; step < max_steps; ++step) {
        std::vector<NodeId> enabled = enabled_nodes(net, cfg);
        if (enabled.empty()) {
            trace.outcome = Outcome::Terminated;
            return trace;
        }
        std::vector<NodeId> chosen = strategy(net, cfg, enabled, rng);
        std::sort(chosen.begin(), chosen.end());
        chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
        if (chosen.empty()) {
            throw StrategyContractViolation("strategy returned an empty activation set");
        }
        for (NodeId p : chosen) {
            if (!std::binary_search(enabled.begin(), enabled.end(), p)) {
                throw StrategyContractViolation("strategy activated disabled node " +
                                                std::to_string(p));
            }
        }
        Configuration next = apply_step(net, cfg, chosen);
        StepClass cls = classify_step(net, cfg, next);
        trace.steps.push_back({std::move(chosen), cls, next});
        cfg = std::move(next);
    }
    trace.outcome = is_terminal(net, cfg) ? Outcome::Terminated : Outcome::Truncated;
    return trace;
}

enum class TraceDefect { IllegalStep, WrongClass, NotMaximal };

inline const char* to_string(TraceDefect d) {
    switch (d) {
        case TraceDefect::IllegalStep: return "IllegalStep";
        case TraceDefect::WrongClass: return "WrongClass";
        case TraceDefect::NotMaximal: return "NotMaximal";
    }
    return "?";
}

struct TraceIssue {
    TraceDefect defect;
    std::size_t step_index;  // meaningless for NotMaximal
    std::string detail;
};

/// Re-executes every recorded step and checks classes and maximality.
/// nullopt means the trace is a faithful, correctly classified execution.
inline std::optional<TraceIssue> validate_trace(const Network& net, const Trace& trace) {
    Configuration cfg = trace.initial;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const TraceStep& step = trace.steps[i];
        for (NodeId p : step.activated) {
            if (p >= net.node_count() || !is_enabled(net, cfg, p)) {
                return TraceIssue{TraceDefect::IllegalStep, i,
                                  "activated node " + std::to_string(p) + " is not enabled"};
            }
        }
        Configuration next;
        try {
            next = apply_step(net, cfg, step.activated);
        } catch (const std::logic_error& e) {
            return TraceIssue{TraceDefect::IllegalStep, i, e.what()};
        }
        if (!(next == step.config)) {
            return TraceIssue{TraceDefect::IllegalStep, i,
                              "recorded configuration is not the step's result"};
        }
        StepClass cls = classify_step(net, cfg, next);
        if (cls != step.cls) {
            return TraceIssue{TraceDefect::WrongClass, i,
                              std::string("step is ") + to_string(cls) + ", recorded as " +
                                  to_string(step.cls)};
        }
        cfg = std::move(next);
    }
    if (trace.outcome == Outcome::Terminated && !is_terminal(net, cfg)) {
        return TraceIssue{TraceDefect::NotMaximal, trace.steps.size(),
                          "trace claims termination but nodes are still enabled"};
    }
    return std::nullopt;
}

}  // namespace stabilis
