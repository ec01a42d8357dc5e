#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stabilis/checker.hpp"
#include "stabilis/daemons.hpp"
#include "stabilis/json_io.hpp"
#include "stabilis/potentials.hpp"
#include "stabilis/topology.hpp"

namespace stabilis {

namespace detail {

/// 0 = quiet, 1 = progress notes, 2 = chatty; read from STABILIS_LOG.
inline int log_level() {
    const char* v = std::getenv("STABILIS_LOG");
    if (v == nullptr) return 0;
    const std::string s = v;
    if (s == "debug" || s == "2") return 2;
    if (s == "info" || s == "1") return 1;
    return 0;
}

inline Network network_from_args(const std::string& net_path, const std::string& gen_spec) {
    if (!net_path.empty() && !gen_spec.empty()) {
        throw MalformedInput("give either --net or --gen, not both");
    }
    if (!net_path.empty()) return network_from_json(load_json_file(net_path));
    if (gen_spec.empty()) throw MalformedInput("a network source is required (--net or --gen)");
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = gen_spec.find(':', start);
        parts.push_back(gen_spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    const auto kind = network_kind_from_name(parts[0]);
    if (!kind) throw MalformedInput("unknown network kind \"" + parts[0] + "\"");
    if (parts.size() < 2 || parts.size() > 3) {
        throw MalformedInput("--gen expects kind:n or kind:n:seed");
    }
    std::size_t n = 0;
    std::uint64_t seed = 0;
    try {
        n = std::stoul(parts[1]);
        if (parts.size() == 3) seed = std::stoull(parts[2]);
    } catch (const std::exception&) {
        throw MalformedInput("--gen sizes and seeds must be integers");
    }
    if (*kind == NetworkKind::Random && parts.size() != 3) {
        throw MalformedInput("random networks need a seed: random:n:seed");
    }
    return generate(*kind, n, seed);
}

inline Configuration random_configuration(const Network& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::uint64_t d_cap = 2 * net.node_count();
    Configuration cfg = zero_configuration(net);
    for (NodeId p = 0; p < net.node_count(); ++p) {
        cfg[p].d = rng() % (d_cap + 1);
        if (!net.is_root(p)) {
            const auto& nbrs = net.neighbors(p);
            cfg[p].par = nbrs[pick(rng, nbrs.size())];
        }
    }
    return cfg;
}

inline Configuration configuration_from_args(const Network& net, const std::string& init_spec) {
    if (init_spec.empty() || init_spec == "zeros") return zero_configuration(net);
    if (init_spec.rfind("random:", 0) == 0) {
        std::uint64_t seed = 0;
        try {
            seed = std::stoull(init_spec.substr(7));
        } catch (const std::exception&) {
            throw MalformedInput("--init random needs an integer seed: random:seed");
        }
        return random_configuration(net, seed);
    }
    return configuration_from_json(net, load_json_file(init_spec));
}

inline DaemonStrategy strategy_from_spec(const std::string& spec,
                                         const std::vector<std::vector<NodeId>>& plan) {
    const std::size_t colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string param = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto numeric = [&param](double fallback) {
        if (param.empty()) return fallback;
        try {
            return std::stod(param);
        } catch (const std::exception&) {
            throw MalformedInput("strategy parameter must be numeric");
        }
    };
    if (name == "synchronous") return synchronous_strategy();
    if (name == "central_first") return central_first_strategy();
    if (name == "central_random") return central_random_strategy();
    if (name == "random_subset") return random_subset_strategy(numeric(0.5));
    if (name == "greedy_adversary") {
        return greedy_adversary_strategy(static_cast<std::size_t>(numeric(256)));
    }
    if (name == "scripted") return scripted_strategy(plan);
    throw MalformedInput("unknown strategy \"" + name + "\"");
}

inline json class_tallies(const Trace& trace) {
    std::uint64_t r = 0, d = 0, p = 0;
    for (const TraceStep& s : trace.steps) {
        switch (s.cls) {
            case StepClass::RootStep: ++r; break;
            case StepClass::DStep: ++d; break;
            case StepClass::ParStep: ++p; break;
        }
    }
    return json{{"R", r}, {"D", d}, {"P", p}};
}

struct SimulateArgs {
    std::string net_path, gen_spec, init_spec, plan_path;
    std::string strategy = "synchronous";
    std::uint64_t seed = 0;
    std::uint64_t max_steps = 100'000;
    std::string trace_path;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const Network net = network_from_args(a.net_path, a.gen_spec);
    const Configuration cfg0 = configuration_from_args(net, a.init_spec);
    std::vector<std::vector<NodeId>> plan;
    std::uint64_t max_steps = a.max_steps;
    if (a.strategy.rfind("scripted", 0) == 0) {
        if (a.plan_path.empty()) throw MalformedInput("scripted strategy needs --plan");
        plan = plan_from_json(load_json_file(a.plan_path));
        max_steps = std::min<std::uint64_t>(max_steps, plan.size());
    } else if (!a.plan_path.empty()) {
        throw MalformedInput("--plan only makes sense with --strategy scripted");
    }
    const DaemonStrategy strategy = strategy_from_spec(a.strategy, plan);
    const Trace trace = run_execution(net, cfg0, strategy, max_steps, a.seed);
    if (!a.trace_path.empty()) write_json_file(a.trace_path, trace_to_json(net, trace));
    const json summary{{"steps", trace.steps.size()},
                       {"classes", class_tallies(trace)},
                       {"outcome", to_string(trace.outcome)},
                       {"final_legitimate", is_legitimate(net, trace.final_config())}};
    out << summary.dump(2) << '\n';
    return 0;
}

struct CheckArgs {
    std::string net_path, gen_spec, replay_path, report_path, dot_path;
    std::size_t all_graphs = 0;
    std::uint64_t d_max = 2;
    std::size_t jobs = 1;
    std::size_t max_states = ExploreLimits{}.max_states;
};

inline int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
    if (!a.replay_path.empty()) {
        const Network net = network_from_args(a.net_path, a.gen_spec);
        const Trace trace = trace_from_json(net, load_json_file(a.replay_path));
        const auto issue = validate_trace(net, trace);
        json verdict{{"trace_valid", !issue.has_value()}, {"steps", trace.steps.size()}};
        if (issue) {
            verdict["defect"] = to_string(issue->defect);
            verdict["step"] = issue->step_index;
            verdict["detail"] = issue->detail;
        }
        out << verdict.dump(2) << '\n';
        return issue ? 1 : 0;
    }

    std::vector<Network> nets;
    if (a.all_graphs > 0) {
        if (!a.net_path.empty() || !a.gen_spec.empty()) {
            throw MalformedInput("--all-graphs replaces --net/--gen");
        }
        nets = enumerate_networks(a.all_graphs);
    } else {
        nets.push_back(network_from_args(a.net_path, a.gen_spec));
    }
    if (!a.dot_path.empty() && nets.size() != 1) {
        throw MalformedInput("--dot needs a single network");
    }

    const int verbosity = log_level();
    json per_network = json::array();
    bool converged = true;
    bool monitors_clean = true;
    std::uint64_t total_violations = 0;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const Network& net = nets[i];
        if (net.node_count() > 32) {
            throw std::invalid_argument("explicit-state checking is limited to 32 nodes");
        }
        ExploreLimits limits = default_limits(net, a.d_max);
        limits.max_states = a.max_states;
        // The initial grid alone can dwarf the state budget; refuse before
        // materializing it rather than OOMing inside the enumerator.
        std::uint64_t predicted = 1;
        const auto saturating_mul = [&predicted](std::uint64_t f) {
            if (f != 0 && predicted > std::numeric_limits<std::uint64_t>::max() / f) {
                predicted = std::numeric_limits<std::uint64_t>::max();
            } else {
                predicted *= f;
            }
        };
        for (NodeId p = 0; p < net.node_count(); ++p) {
            saturating_mul(a.d_max + 1);
            if (!net.is_root(p)) saturating_mul(net.neighbors(p).size());
        }
        if (predicted > limits.max_states) {
            throw StateLimitExceeded("the initial configurations alone (" +
                                     std::to_string(predicted) + ") exceed the state budget");
        }
        const std::vector<Configuration> initials = enumerate_initial_configs(net, a.d_max);
        const StepGraph graph = explore(net, initials, limits);
        const ConvergenceResult conv = verify_convergence(graph);
        const MonitorReport report = run_monitors(graph, a.jobs);
        converged = converged && conv.acyclic && conv.all_sinks_legitimate;
        monitors_clean = monitors_clean && report.all_passed();
        total_violations += report.total_violations();
        json entry{{"network", network_to_json(net)},
                   {"initial_configs", initials.size()},
                   {"states", graph.vertices.size()},
                   {"step_edges", graph.edges.size()},
                   {"acyclic", conv.acyclic},
                   {"all_sinks_legitimate", conv.all_sinks_legitimate},
                   {"monitors", monitor_report_to_json(report)}};
        if (conv.acyclic) entry["worst_case_steps"] = worst_case_steps(graph);
        per_network.push_back(std::move(entry));
        if (verbosity >= 1) {
            err << "[" << (i + 1) << "/" << nets.size() << "] states=" << graph.vertices.size()
                << " edges=" << graph.edges.size()
                << " violations=" << report.total_violations() << '\n';
        }
        if (!a.dot_path.empty()) {
            std::ofstream dot(a.dot_path);
            if (!dot) throw MalformedInput("cannot write " + a.dot_path);
            write_dot(graph, dot);
        }
    }
    const json full{{"d_max", a.d_max},
                    {"networks", std::move(per_network)},
                    {"all_converged", converged},
                    {"total_violations", total_violations}};
    if (!a.report_path.empty()) write_json_file(a.report_path, full);
    out << full.dump(2) << '\n';
    return (converged && monitors_clean) ? 0 : 1;
}

struct PotentialArgs {
    std::string net_path, gen_spec, config_path;
};

inline int cmd_potential(const PotentialArgs& a, std::ostream& out) {
    const Network net = network_from_args(a.net_path, a.gen_spec);
    const Configuration cfg = configuration_from_args(net, a.config_path);
    const DAggregates agg = d_aggregates(cfg);
    const DBounds bounds = bounds_of(net, cfg);
    const DPotential phi = d_potential(net, bounds, cfg);

    auto edges_to_json = [](const std::vector<Edge>& edges) {
        json arr = json::array();
        for (Edge e : edges) arr.push_back(json::array({e.a, e.b}));
        return arr;
    };
    json ns = json::object();
    for (const auto& [rank, edges] : ns_by_rank(net, cfg)) {
        ns[std::to_string(rank)] = edges_to_json(edges);
    }
    json phi_ns = json::object();
    for (std::uint64_t k = phi.ns.k_lo; k <= phi.ns.k_hi; ++k) {
        phi_ns[std::to_string(k)] = edges_to_json(phi.ns.sets[k - phi.ns.k_lo]);
    }
    json enabled = json::object();
    for (NodeId p = 0; p < net.node_count(); ++p) {
        const auto action = enabled_action(net, cfg, p);
        enabled[std::to_string(p)] = action ? json(to_string(*action)) : json(nullptr);
    }
    const json dump{
        {"aggregates", {{"min_d", agg.min_d}, {"max_d", agg.max_d}, {"sum_d", agg.sum_d}}},
        {"bottom", configuration_to_json(net, bounds.bot)},
        {"top", configuration_to_json(net, bounds.top)},
        {"ns_by_rank", std::move(ns)},
        {"phi", {{"k_lo", phi.ns.k_lo}, {"k_hi", phi.ns.k_hi}, {"ns", std::move(phi_ns)},
                 {"sum_d", phi.sum_d}}},
        {"cp_count", cp_count(net, cfg)},
        {"terminal", is_terminal(net, cfg)},
        {"enabled", std::move(enabled)}};
    out << dump.dump(2) << '\n';
    return 0;
}

}  // namespace detail

/// Entry point shared by the binary and the tests; args exclude argv[0].
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"self-stabilizing BFS spanning tree: simulator and checker"};
    app.require_subcommand(1);

    detail::SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "run one execution under a daemon strategy and report the trace");
    simulate->add_option("--net", sim.net_path, "network JSON file");
    simulate->add_option("--gen", sim.gen_spec,
                         "generated network kind:n[:seed] "
                         "(path, cycle, star, complete, random)");
    simulate->add_option("--init", sim.init_spec,
                         "initial configuration: zeros, random:seed, or a JSON file");
    simulate->add_option("--strategy", sim.strategy,
                         "daemon strategy: synchronous, central_first, central_random, "
                         "random_subset[:p], greedy_adversary[:budget], scripted");
    simulate->add_option("--plan", sim.plan_path, "activation plan JSON (scripted strategy)");
    simulate->add_option("--seed", sim.seed, "random seed for the strategy");
    simulate->add_option("--max-steps", sim.max_steps, "step budget before truncation");
    simulate->add_option("--trace", sim.trace_path, "write the trace JSON here");

    detail::CheckArgs chk;
    CLI::App* check = app.add_subcommand(
        "check", "exhaustively explore the step relation and re-check every proof obligation");
    check->add_option("--net", chk.net_path, "network JSON file");
    check->add_option("--gen", chk.gen_spec, "generated network kind:n[:seed]");
    check->add_option("--all-graphs", chk.all_graphs,
                      "run on every connected labeled network with up to N nodes");
    check->add_option("--dmax", chk.d_max, "initial estimates range over [0, dmax]");
    check->add_option("--jobs", chk.jobs, "worker threads for the step monitors");
    check->add_option("--max-states", chk.max_states, "abort beyond this many configurations");
    check->add_option("--report", chk.report_path, "write the report JSON here");
    check->add_option("--dot", chk.dot_path, "write the step graph in DOT form here");
    check->add_option("--trace", chk.replay_path,
                      "validate a recorded trace instead of exploring");

    detail::PotentialArgs pot;
    CLI::App* potential = app.add_subcommand(
        "potential", "dump the termination-measure view of one configuration");
    potential->add_option("--net", pot.net_path, "network JSON file");
    potential->add_option("--gen", pot.gen_spec, "generated network kind:n[:seed]");
    potential->add_option("--config", pot.config_path,
                          "configuration: zeros, random:seed, or a JSON file");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("stabilis");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return detail::cmd_simulate(sim, out);
        if (check->parsed()) return detail::cmd_check(chk, out, err);
        return detail::cmd_potential(pot, out);
    } catch (const MalformedInput& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace stabilis
