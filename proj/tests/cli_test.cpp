#include "stabilis/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace stabilis {
namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    ASSERT_TRUE(f.is_open()) << path;
    f << content;
}

TEST(Simulate, SynchronousFromZerosTerminatesLegitimately) {
    const CliResult r = run({"simulate", "--gen", "path:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("steps"), 2);
    EXPECT_EQ(j.at("outcome"), "terminated");
    EXPECT_EQ(j.at("final_legitimate"), true);
    EXPECT_EQ(j.at("classes").at("R"), 0);
    EXPECT_EQ(j.at("classes").at("D"), 2);
    EXPECT_EQ(j.at("classes").at("P"), 0);
}

TEST(Simulate, TerminalInitialTakesNoSteps) {
    const CliResult r = run({"simulate", "--gen", "path:1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("steps"), 0);
    EXPECT_EQ(j.at("outcome"), "terminated");
    EXPECT_EQ(j.at("final_legitimate"), true);
}

TEST(Simulate, BudgetTruncates) {
    const CliResult r = run({"simulate", "--gen", "path:3", "--max-steps", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("steps"), 1);
    EXPECT_EQ(j.at("outcome"), "truncated");
    EXPECT_EQ(j.at("final_legitimate"), false);
}

TEST(Simulate, ScriptedPlanReplaysExactly) {
    const std::string plan = temp_path("plan.json");
    write_file(plan, "[[1, 2], [2]]");
    const CliResult r =
        run({"simulate", "--gen", "path:3", "--strategy", "scripted", "--plan", plan});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("steps"), 2);
    EXPECT_EQ(j.at("outcome"), "terminated");
}

TEST(Simulate, ScriptedWithoutPlanIsAnInputError) {
    EXPECT_EQ(run({"simulate", "--gen", "path:3", "--strategy", "scripted"}).code, 2);
    const std::string plan = temp_path("stray_plan.json");
    write_file(plan, "[[1]]");
    EXPECT_EQ(run({"simulate", "--gen", "path:3", "--plan", plan}).code, 2);
}

TEST(Simulate, MalformedNetworkFileNamesTheDefect) {
    const std::string net = temp_path("asym.json");
    write_file(net, R"({"nodes": 2, "root": 0, "adjacency": {"0": [1], "1": []}})");
    const CliResult r = run({"simulate", "--net", net});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("AsymmetricLink"), std::string::npos) << r.err;
}

TEST(Simulate, WritesReplayableTrace) {
    const std::string net = temp_path("p3.json");
    write_file(net, R"({"nodes": 3, "root": 0, "adjacency": {"0": [1], "1": [0, 2], "2": [1]}})");
    const std::string init = temp_path("init222.json");
    write_file(init, R"({"0": {"d": 2, "par": null},
                         "1": {"d": 2, "par": 0},
                         "2": {"d": 2, "par": 1}})");
    const std::string trace = temp_path("trace.json");
    const CliResult sim = run({"simulate", "--net", net, "--init", init, "--strategy",
                               "central_first", "--trace", trace});
    ASSERT_EQ(sim.code, 0) << sim.err;

    const CliResult ok = run({"check", "--net", net, "--trace", trace});
    EXPECT_EQ(ok.code, 0) << ok.err;
    const json verdict = json::parse(ok.out);
    EXPECT_EQ(verdict.at("trace_valid"), true);
    EXPECT_GE(verdict.at("steps").get<std::uint64_t>(), 2u);
}

TEST(CheckReplay, FlagsTamperedConfigAndWrongClass) {
    const std::string net = temp_path("p3b.json");
    write_file(net, R"({"nodes": 3, "root": 0, "adjacency": {"0": [1], "1": [0, 2], "2": [1]}})");
    const std::string init = temp_path("init222b.json");
    write_file(init, R"({"0": {"d": 2, "par": null},
                         "1": {"d": 2, "par": 0},
                         "2": {"d": 2, "par": 1}})");
    const std::string trace = temp_path("traceb.json");
    ASSERT_EQ(run({"simulate", "--net", net, "--init", init, "--strategy", "central_first",
                   "--trace", trace})
                  .code,
              0);

    json t;
    {
        std::ifstream in(trace);
        in >> t;
    }
    json tampered = t;
    tampered["steps"][0]["config"]["1"]["d"] = 99;
    const std::string bad1 = temp_path("tampered_d.json");
    write_file(bad1, tampered.dump());
    const CliResult r1 = run({"check", "--net", net, "--trace", bad1});
    EXPECT_EQ(r1.code, 1);
    const json v1 = json::parse(r1.out);
    EXPECT_EQ(v1.at("trace_valid"), false);
    EXPECT_EQ(v1.at("defect"), "IllegalStep");
    EXPECT_EQ(v1.at("step"), 0);

    // central_first from (2,2,2) activates the root first.
    json flipped = t;
    ASSERT_EQ(flipped["steps"][0]["class"], "R");
    flipped["steps"][0]["class"] = "D";
    const std::string bad2 = temp_path("flipped_class.json");
    write_file(bad2, flipped.dump());
    const CliResult r2 = run({"check", "--net", net, "--trace", bad2});
    EXPECT_EQ(r2.code, 1);
    const json v2 = json::parse(r2.out);
    EXPECT_EQ(v2.at("defect"), "WrongClass");
}

TEST(Check, SmallPathConvergesWithZeroViolations) {
    const std::string report = temp_path("report.json");
    const std::string dot = temp_path("graph.dot");
    const CliResult r = run({"check", "--gen", "path:3", "--dmax", "3", "--report", report,
                             "--dot", dot});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("d_max"), 3);
    EXPECT_EQ(j.at("all_converged"), true);
    EXPECT_EQ(j.at("total_violations"), 0);
    ASSERT_EQ(j.at("networks").size(), 1u);
    const json& entry = j.at("networks").at(0);
    EXPECT_EQ(entry.at("initial_configs"), 128);  // 4^3 d-vectors times 2 parent choices
    EXPECT_EQ(entry.at("acyclic"), true);
    EXPECT_EQ(entry.at("all_sinks_legitimate"), true);
    EXPECT_GE(entry.at("worst_case_steps").get<std::uint64_t>(), 1u);

    std::ifstream rep(report);
    ASSERT_TRUE(rep.is_open());
    std::stringstream file_bytes;
    file_bytes << rep.rdbuf();
    EXPECT_EQ(file_bytes.str(), r.out);  // the report file is the stdout document

    std::ifstream dotfile(dot);
    ASSERT_TRUE(dotfile.is_open());
    std::stringstream dot_bytes;
    dot_bytes << dotfile.rdbuf();
    EXPECT_NE(dot_bytes.str().find("digraph"), std::string::npos);
}

TEST(Check, AllGraphsSweepCoversEveryNetwork) {
    const CliResult r = run({"check", "--all-graphs", "3", "--dmax", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    // 1 + 1 + 4 connected labeled networks on one, two, and three nodes.
    EXPECT_EQ(j.at("networks").size(), 6u);
    EXPECT_EQ(j.at("all_converged"), true);
    EXPECT_EQ(j.at("total_violations"), 0);
}

TEST(Check, OutputIsByteDeterministic) {
    const std::vector<std::string> args = {"check", "--gen", "cycle:4", "--dmax", "2",
                                           "--jobs", "4"};
    const CliResult a = run(args);
    const CliResult b = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Check, StateBudgetIsEnforced) {
    EXPECT_EQ(run({"check", "--gen", "path:3", "--dmax", "2", "--max-states", "2"}).code, 1);
    EXPECT_EQ(run({"check", "--gen", "path:33"}).code, 2);
}

TEST(Potential, DumpsTheMeasureOfAJaggedConfiguration) {
    const std::string net = temp_path("p3c.json");
    write_file(net, R"({"nodes": 3, "root": 0, "adjacency": {"0": [1], "1": [0, 2], "2": [1]}})");
    const std::string cfg = temp_path("cfg305.json");
    write_file(cfg, R"({"0": {"d": 3, "par": null},
                        "1": {"d": 0, "par": 0},
                        "2": {"d": 5, "par": 1}})");
    const CliResult r = run({"potential", "--net", net, "--config", cfg});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("aggregates").at("min_d"), 0);
    EXPECT_EQ(j.at("aggregates").at("max_d"), 5);
    EXPECT_EQ(j.at("aggregates").at("sum_d"), 8);
    EXPECT_EQ(j.at("cp_count"), 0);
    EXPECT_EQ(j.at("terminal"), false);
    EXPECT_EQ(j.at("enabled").at("0"), "Root");
    EXPECT_EQ(j.at("enabled").at("1"), "CD");
    EXPECT_EQ(j.at("enabled").at("2"), "CD");
    EXPECT_EQ(j.at("phi").at("k_lo"), 0);
    EXPECT_EQ(j.at("phi").at("k_hi"), 5);
    EXPECT_EQ(j.at("phi").at("sum_d"), 8);
    // Both edges straddle a gap wider than one, at rank 0.
    ASSERT_TRUE(j.at("ns_by_rank").contains("0"));
    EXPECT_EQ(j.at("ns_by_rank").at("0").size(), 2u);
    EXPECT_EQ(j.at("bottom").at("1").at("d"), 0);
    EXPECT_EQ(j.at("top").at("2").at("d"), 5);
}

TEST(Potential, LegitimateConfigurationIsTerminalWithEmptyMeasure) {
    const CliResult r = run({"potential", "--gen", "star:4", "--config", "zeros"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    // zeros is not legitimate on a star; rerun from the fixed point instead.
    EXPECT_EQ(j.at("terminal"), false);

    const std::string cfg = temp_path("star_fixed.json");
    write_file(cfg, R"({"0": {"d": 0, "par": null},
                        "1": {"d": 1, "par": 0},
                        "2": {"d": 1, "par": 0},
                        "3": {"d": 1, "par": 0}})");
    const CliResult fixed = run({"potential", "--gen", "star:4", "--config", cfg});
    ASSERT_EQ(fixed.code, 0) << fixed.err;
    const json f = json::parse(fixed.out);
    EXPECT_EQ(f.at("terminal"), true);
    EXPECT_TRUE(f.at("ns_by_rank").empty());
    for (const auto& [node, action] : f.at("enabled").items()) {
        EXPECT_TRUE(action.is_null()) << node;
    }
}

TEST(Potential, SingletonNetworkIsDegenerateButWellFormed) {
    const CliResult r = run({"potential", "--gen", "path:1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("terminal"), true);
    EXPECT_EQ(j.at("aggregates").at("sum_d"), 0);
    EXPECT_TRUE(j.at("ns_by_rank").empty());
    EXPECT_EQ(j.at("cp_count"), 0);
    EXPECT_TRUE(j.at("enabled").at("0").is_null());
}

TEST(JsonIo, NetworkAndConfigurationRoundTrip) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const Network net = oracle::random_network(rng, 8);
        const Network back = network_from_json(network_to_json(net));
        EXPECT_EQ(back.adjacency, net.adjacency);
        EXPECT_EQ(back.root, net.root);
        const Configuration cfg = oracle::random_config(net, rng, 9);
        const Configuration again = configuration_from_json(net, configuration_to_json(net, cfg));
        EXPECT_EQ(again, cfg);
    }
}

TEST(Potential, OutputIsByteDeterministic) {
    const CliResult a = run({"potential", "--gen", "complete:4", "--config", "random:11"});
    const CliResult b = run({"potential", "--gen", "complete:4", "--config", "random:11"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const CliResult c = run({"potential", "--gen", "complete:4", "--config", "random:12"});
    EXPECT_NE(a.out, c.out);
}

TEST(RunCli, EveryStdoutDocumentIsValidJson) {
    const std::vector<std::vector<std::string>> invocations = {
        {"simulate", "--gen", "path:3", "--strategy", "random_subset:0.7", "--seed", "5"},
        {"simulate", "--gen", "cycle:4", "--strategy", "greedy_adversary:64", "--seed", "2",
         "--init", "random:3"},
        {"check", "--gen", "cycle:3", "--dmax", "1"},
        {"potential", "--gen", "path:4", "--config", "random:9"},
    };
    for (const auto& args : invocations) {
        const CliResult r = run(args);
        EXPECT_EQ(r.code, 0) << r.err;
        EXPECT_TRUE(json::accept(r.out)) << r.out;
    }
}

TEST(RunCli, InputErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);                                     // no subcommand
    EXPECT_EQ(run({"frobnicate"}).code, 2);                         // unknown subcommand
    EXPECT_EQ(run({"simulate"}).code, 2);                           // no network source
    EXPECT_EQ(run({"simulate", "--gen", "grid:3"}).code, 2);        // unknown kind
    EXPECT_EQ(run({"simulate", "--gen", "path:zero"}).code, 2);     // non-numeric size
    EXPECT_EQ(run({"simulate", "--gen", "random:4"}).code, 2);      // seedless random
    EXPECT_EQ(run({"simulate", "--gen", "path:0"}).code, 2);        // empty network
    EXPECT_EQ(run({"simulate", "--net", "/no/such/file.json"}).code, 2);
    EXPECT_EQ(run({"simulate", "--gen", "path:3", "--strategy", "bogus"}).code, 2);
    EXPECT_EQ(run({"simulate", "--gen", "path:3", "--net", "x.json"}).code, 2);
    EXPECT_EQ(run({"check", "--all-graphs", "2", "--gen", "path:2"}).code, 2);
    EXPECT_EQ(run({"check", "--all-graphs", "2", "--dot", "/tmp/x.dot"}).code, 2);
    EXPECT_EQ(run({"check"}).code, 2);
    EXPECT_EQ(run({"potential", "--gen", "path:3", "--config", "random:x"}).code, 2);
}

TEST(RunCli, HelpExitsZero) {
    const CliResult top = run({"--help"});
    EXPECT_EQ(top.code, 0);
    EXPECT_NE(top.out.find("simulate"), std::string::npos);
    EXPECT_EQ(run({"check", "--help"}).code, 0);
}

TEST(RunCli, LogLevelRoutesProgressToStderr) {
    ASSERT_EQ(setenv("STABILIS_LOG", "info", 1), 0);
    const CliResult chatty = run({"check", "--gen", "path:2", "--dmax", "1"});
    ASSERT_EQ(unsetenv("STABILIS_LOG"), 0);
    EXPECT_EQ(chatty.code, 0);
    EXPECT_NE(chatty.err.find("states="), std::string::npos);
    EXPECT_TRUE(json::accept(chatty.out));  // stdout stays pure JSON

    const CliResult quiet = run({"check", "--gen", "path:2", "--dmax", "1"});
    EXPECT_EQ(quiet.err, "");
    EXPECT_EQ(quiet.out, chatty.out);
}

}  // namespace
}  // namespace stabilis
