#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabilis/algorithm.hpp"
#include "stabilis/checker.hpp"
#include "stabilis/daemons.hpp"
#include "stabilis/topology.hpp"

namespace stabilis {

struct MalformedInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using nlohmann::json;

inline json network_to_json(const Network& net) {
    json adjacency = json::object();
    for (NodeId p = 0; p < net.node_count(); ++p) {
        adjacency[std::to_string(p)] = net.neighbors(p);
    }
    return json{{"nodes", net.node_count()},
                {"root", net.root},
                {"adjacency", std::move(adjacency)}};
}

inline Network network_from_json(const json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("root") ||
        !j.contains("adjacency")) {
        throw MalformedInput("network must have nodes, root and adjacency");
    }
    if (!j["nodes"].is_number_unsigned() || !j["root"].is_number_unsigned()) {
        throw MalformedInput("nodes and root must be non-negative integers");
    }
    const auto n = j["nodes"].get<std::uint64_t>();
    if (n == 0 || n > std::numeric_limits<NodeId>::max()) {
        throw MalformedInput("node count out of range");
    }
    const auto root = j["root"].get<std::uint64_t>();
    if (root >= n) throw MalformedInput("NoRoot: root is not a node");
    Network net;
    net.root = static_cast<NodeId>(root);
    net.adjacency.resize(n);
    const json& adjacency = j["adjacency"];
    if (!adjacency.is_object()) throw MalformedInput("adjacency must be an object");
    for (NodeId p = 0; p < n; ++p) {
        const std::string key = std::to_string(p);
        if (!adjacency.contains(key)) {
            throw MalformedInput("adjacency entry missing for node " + key);
        }
        const json& row = adjacency[key];
        if (!row.is_array()) throw MalformedInput("adjacency of node " + key + " must be a list");
        for (const json& q : row) {
            if (!q.is_number_unsigned()) {
                throw MalformedInput("neighbour of node " + key +
                                     " must be a non-negative integer");
            }
            // Out-of-range identifiers are kept so validation names the defect.
            net.adjacency[p].push_back(static_cast<NodeId>(
                std::min<std::uint64_t>(q.get<std::uint64_t>(),
                                        std::numeric_limits<NodeId>::max())));
        }
    }
    if (adjacency.size() != n) throw MalformedInput("adjacency has entries for unknown nodes");
    if (const auto issue = validate_network(net)) {
        throw MalformedInput(to_string(issue->defect) + (": " + issue->detail));
    }
    return net;
}

inline json configuration_to_json(const Network& net, const Configuration& cfg) {
    json out = json::object();
    for (NodeId p = 0; p < cfg.size(); ++p) {
        json entry{{"d", cfg[p].d}};
        if (net.is_root(p)) {
            entry["par"] = nullptr;
        } else {
            entry["par"] = cfg[p].par;
        }
        out[std::to_string(p)] = std::move(entry);
    }
    return out;
}

inline Configuration configuration_from_json(const Network& net, const json& j) {
    if (!j.is_object()) throw MalformedInput("configuration must be an object");
    const std::size_t n = net.node_count();
    if (j.size() != n) throw MalformedInput("configuration must list every node exactly once");
    Configuration cfg = zero_configuration(net);  // pins the root's parent
    for (NodeId p = 0; p < n; ++p) {
        const std::string key = std::to_string(p);
        if (!j.contains(key)) throw MalformedInput("configuration entry missing for node " + key);
        const json& entry = j[key];
        if (!entry.is_object() || !entry.contains("d") || !entry.contains("par")) {
            throw MalformedInput("state of node " + key + " must have d and par");
        }
        if (!entry["d"].is_number_unsigned()) {
            throw MalformedInput("d of node " + key + " must be a non-negative integer");
        }
        cfg[p].d = entry["d"].get<std::uint64_t>();
        const json& par = entry["par"];
        if (net.is_root(p)) {
            if (!par.is_null()) throw MalformedInput("par of the root must be null");
            continue;
        }
        if (!par.is_number_unsigned()) {
            throw MalformedInput("par of node " + key + " must be a node identifier");
        }
        const auto target = par.get<std::uint64_t>();
        const auto& nbrs = net.neighbors(p);
        if (std::find(nbrs.begin(), nbrs.end(), target) == nbrs.end()) {
            throw MalformedInput("par of node " + key + " is not one of its neighbours");
        }
        cfg[p].par = static_cast<NodeId>(target);
    }
    return cfg;
}

inline const char* to_string(Outcome o) {
    return o == Outcome::Terminated ? "terminated" : "truncated";
}

inline json trace_to_json(const Network& net, const Trace& trace) {
    json steps = json::array();
    for (const TraceStep& s : trace.steps) {
        steps.push_back(json{{"activated", s.activated},
                             {"class", to_string(s.cls)},
                             {"config", configuration_to_json(net, s.config)}});
    }
    json out{{"initial", configuration_to_json(net, trace.initial)},
             {"steps", std::move(steps)},
             {"outcome", to_string(trace.outcome)}};
    if (trace.outcome == Outcome::Truncated) out["max_steps"] = trace.max_steps;
    return out;
}

inline StepClass step_class_from_token(const std::string& token) {
    if (token == "R") return StepClass::RootStep;
    if (token == "D") return StepClass::DStep;
    if (token == "P") return StepClass::ParStep;
    throw MalformedInput("unknown step class \"" + token + "\"");
}

inline Trace trace_from_json(const Network& net, const json& j) {
    if (!j.is_object() || !j.contains("initial") || !j.contains("steps") ||
        !j.contains("outcome")) {
        throw MalformedInput("trace must have initial, steps and outcome");
    }
    Trace trace;
    trace.initial = configuration_from_json(net, j["initial"]);
    if (!j["steps"].is_array()) throw MalformedInput("steps must be a list");
    for (const json& s : j["steps"]) {
        if (!s.is_object() || !s.contains("activated") || !s.contains("class") ||
            !s.contains("config")) {
            throw MalformedInput("each step must have activated, class and config");
        }
        TraceStep step;
        if (!s["activated"].is_array()) throw MalformedInput("activated must be a list");
        for (const json& id : s["activated"]) {
            if (!id.is_number_unsigned() || id.get<std::uint64_t>() >= net.node_count()) {
                throw MalformedInput("activated set contains an unknown node");
            }
            step.activated.push_back(static_cast<NodeId>(id.get<std::uint64_t>()));
        }
        if (!s["class"].is_string()) throw MalformedInput("class must be a string");
        step.cls = step_class_from_token(s["class"].get<std::string>());
        step.config = configuration_from_json(net, s["config"]);
        trace.steps.push_back(std::move(step));
    }
    const std::string outcome = j["outcome"].is_string() ? j["outcome"].get<std::string>() : "";
    if (outcome == "terminated") {
        trace.outcome = Outcome::Terminated;
    } else if (outcome == "truncated") {
        trace.outcome = Outcome::Truncated;
    } else {
        throw MalformedInput("outcome must be \"terminated\" or \"truncated\"");
    }
    trace.max_steps = j.contains("max_steps") && j["max_steps"].is_number_unsigned()
                          ? j["max_steps"].get<std::uint64_t>()
                          : trace.steps.size();
    return trace;
}

/// Scripted activation plan: a list of activation sets.
inline std::vector<std::vector<NodeId>> plan_from_json(const json& j) {
    if (!j.is_array()) throw MalformedInput("plan must be a list of activation sets");
    std::vector<std::vector<NodeId>> plan;
    for (const json& set : j) {
        if (!set.is_array()) throw MalformedInput("each plan entry must be a list of nodes");
        std::vector<NodeId> nodes;
        for (const json& id : set) {
            if (!id.is_number_unsigned()) throw MalformedInput("plan node must be an identifier");
            nodes.push_back(static_cast<NodeId>(id.get<std::uint64_t>()));
        }
        plan.push_back(std::move(nodes));
    }
    return plan;
}

inline json monitor_counterexample_to_json(const MonitorCounterexample& cex) {
    return json{{"edge", cex.edge_index},
                {"source", cex.source},
                {"target", cex.target},
                {"activated", nodes_of(cex.activated)}};
}

inline json monitor_report_to_json(const MonitorReport& report) {
    json checks = json::object();
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const CheckStats& s = report.checks[i];
        json entry{{"passes", s.passes}, {"violations", s.violations}};
        entry["first_counterexample"] =
            s.first_counterexample ? monitor_counterexample_to_json(*s.first_counterexample)
                                   : json(nullptr);
        checks[to_string(static_cast<MonitorCheck>(i))] = std::move(entry);
    }
    return json{{"checks", std::move(checks)},
                {"total_violations", report.total_violations()}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedInput(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw MalformedInput("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace stabilis
