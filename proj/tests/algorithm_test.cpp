#include "stabilis/algorithm.hpp"

#include <gtest/gtest.h>

#include <limits>

#include "oracles.hpp"
#include "stabilis/checker.hpp"

using namespace stabilis;

TEST(DistMacro, MinOverNeighborsPlusOne) {
    const Network p3 = fix::p3();
    EXPECT_EQ(dist_macro(p3, fix::config_of(p3, {0, 1, 5}), 1), 1u);
    EXPECT_EQ(dist_macro(p3, fix::config_of(p3, {3, 0, 5}), 1), 4u);
    EXPECT_EQ(dist_macro(p3, fix::config_of(p3, {0, 5, 1}), 2), 6u);
}

TEST(DistMacro, RefusesToWrapAround) {
    const Network p2 = fix::p2();
    Configuration cfg = zero_configuration(p2);
    cfg[0].d = std::numeric_limits<std::uint64_t>::max();
    EXPECT_THROW(dist_macro(p2, cfg, 1), std::overflow_error);
}

TEST(DistMacro, IsolatedNodeIsDefended) {
    Network broken;
    broken.root = 0;
    broken.adjacency = {{}};
    const Configuration cfg = zero_configuration(broken);
    EXPECT_THROW(dist_macro(broken, cfg, 0), EmptyNeighborhood);
}

TEST(ParDist, FirstChannelTieBreak) {
    const Network p3 = fix::p3();
    // Both r and b satisfy q.d + 1 = 1; a's channel order is [r, b].
    EXPECT_EQ(par_dist(p3, fix::config_of(p3, {0, 1, 0}), 1), 0u);
    EXPECT_EQ(par_dist(p3, fix::config_of(p3, {5, 1, 0}), 1), 2u);
    EXPECT_EQ(par_dist(p3, fix::config_of(p3, {0, 2, 1}), 1), 2u);
}

TEST(ParDist, NoWitnessSignalsCallerBug) {
    const Network p3 = fix::p3();
    EXPECT_THROW(par_dist(p3, fix::config_of(p3, {5, 0, 5}), 1), NoWitness);
}

TEST(EnabledAction, GuardEvaluation) {
    const Network p3 = fix::p3();
    const Configuration far = fix::config_of(p3, {3, 0, 5});
    EXPECT_EQ(enabled_action(p3, far, 0), ActionKind::Root);
    EXPECT_EQ(enabled_action(p3, far, 1), ActionKind::CD);
    EXPECT_EQ(enabled_action(p3, far, 2), ActionKind::CD);

    const Configuration swapped = fix::config_of(p3, {0, 1, 2}, {0, 2, 1});
    EXPECT_EQ(enabled_action(p3, swapped, 1), ActionKind::CP);
    EXPECT_EQ(enabled_action(p3, swapped, 2), std::nullopt);

    const Configuration good = fix::config_of(p3, {0, 1, 2}, {0, 0, 1});
    for (NodeId p = 0; p < 3; ++p) EXPECT_EQ(enabled_action(p3, good, p), std::nullopt);
}

TEST(EnabledAction, CdAndCpAreMutuallyExclusive) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const Network net = oracle::random_network(rng, 6);
        const Configuration cfg = oracle::random_config(net, rng, 8);
        for (NodeId p = 0; p < net.node_count(); ++p) {
            const auto action = enabled_action(net, cfg, p);
            if (net.is_root(p)) {
                EXPECT_NE(action, ActionKind::CD);
                EXPECT_NE(action, ActionKind::CP);
            } else if (action == ActionKind::CP) {
                EXPECT_EQ(cfg[p].d, dist_macro(net, cfg, p));
            } else if (action == ActionKind::CD) {
                EXPECT_NE(cfg[p].d, dist_macro(net, cfg, p));
            }
        }
    }
}

TEST(ApplyStep, ReadsThePreStepConfiguration) {
    const Network p3 = fix::p3();
    const Configuration zeros = fix::config_of(p3, {0, 0, 0});
    const std::vector<NodeId> both{1, 2};
    EXPECT_EQ(apply_step(p3, zeros, both), fix::config_of(p3, {0, 1, 1}));
}

TEST(ApplyStep, CdWritesTheMacroValue) {
    const Network p3 = fix::p3();
    const std::vector<NodeId> just_b{2};
    EXPECT_EQ(apply_step(p3, fix::config_of(p3, {0, 5, 1}), just_b),
              fix::config_of(p3, {0, 5, 6}));
}

TEST(ApplyStep, CpRetargetsTheParentOnly) {
    const Network p3 = fix::p3();
    const Configuration before = fix::config_of(p3, {0, 1, 2}, {0, 2, 1});
    const std::vector<NodeId> just_a{1};
    const Configuration after = apply_step(p3, before, just_a);
    EXPECT_EQ(after, fix::config_of(p3, {0, 1, 2}, {0, 0, 1}));
}

TEST(ApplyStep, RejectsEmptyAndDisabledActivations) {
    const Network p3 = fix::p3();
    const Configuration good = fix::config_of(p3, {0, 1, 2}, {0, 0, 1});
    const std::vector<NodeId> none{};
    const std::vector<NodeId> just_b{2};
    EXPECT_THROW(apply_step(p3, good, none), EmptyActivation);
    EXPECT_THROW(apply_step(p3, good, just_b), NodeNotEnabled);
}

TEST(ApplyStep, EveryActivationChangesTheExecutingNode) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const Network net = oracle::random_network(rng, 6);
        const Configuration cfg = oracle::random_config(net, rng, 8);
        for (NodeId p : enabled_nodes(net, cfg)) {
            const std::vector<NodeId> solo{p};
            const Configuration next = apply_step(net, cfg, solo);
            EXPECT_NE(next[p], cfg[p]);
        }
    }
}

TEST(ApplyStep, SimultaneousEqualsPerNodeAgainstSource) {
    std::mt19937_64 rng(9);
    int multi_activations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Network net = oracle::random_network(rng, 6);
        const Configuration cfg = oracle::random_config(net, rng, 8);
        const std::vector<NodeId> enabled = enabled_nodes(net, cfg);
        if (enabled.size() < 2) continue;
        ++multi_activations;
        const Configuration joint = apply_step(net, cfg, enabled);
        for (NodeId p = 0; p < net.node_count(); ++p) {
            const bool activated =
                std::find(enabled.begin(), enabled.end(), p) != enabled.end();
            if (activated) {
                const std::vector<NodeId> solo{p};
                EXPECT_EQ(joint[p], apply_step(net, cfg, solo)[p]);
            } else {
                EXPECT_EQ(joint[p], cfg[p]);
            }
        }
    }
    EXPECT_GT(multi_activations, 100);
}

TEST(ClassifyStep, ThreeClasses) {
    const Network p3 = fix::p3();
    EXPECT_EQ(classify_step(p3, fix::config_of(p3, {3, 0, 5}), fix::config_of(p3, {0, 4, 5})),
              StepClass::RootStep);
    EXPECT_EQ(classify_step(p3, fix::config_of(p3, {0, 5, 1}), fix::config_of(p3, {0, 5, 6})),
              StepClass::DStep);
    EXPECT_EQ(classify_step(p3, fix::config_of(p3, {0, 1, 2}, {0, 2, 1}),
                            fix::config_of(p3, {0, 1, 2}, {0, 0, 1})),
              StepClass::ParStep);
}

TEST(ClassifyStep, PartitionsAllLegalSteps) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const Network net = oracle::random_network(rng, 6);
        const Configuration cfg = oracle::random_config(net, rng, 8);
        const std::vector<NodeId> enabled = enabled_nodes(net, cfg);
        if (enabled.empty()) continue;
        const Configuration next = apply_step(net, cfg, enabled);
        const StepClass cls = classify_step(net, cfg, next);
        const bool root_changed = cfg[net.root].d != next[net.root].d;
        bool other_changed = false;
        for (NodeId p = 0; p < net.node_count(); ++p) {
            if (p != net.root && cfg[p].d != next[p].d) other_changed = true;
        }
        if (root_changed) {
            EXPECT_EQ(cls, StepClass::RootStep);
        } else if (other_changed) {
            EXPECT_EQ(cls, StepClass::DStep);
        } else {
            EXPECT_EQ(cls, StepClass::ParStep);
        }
    }
}

TEST(Terminal, Examples) {
    const Network p3 = fix::p3();
    EXPECT_TRUE(is_terminal(p3, fix::config_of(p3, {0, 1, 2}, {0, 0, 1})));
    EXPECT_FALSE(is_terminal(p3, fix::config_of(p3, {3, 0, 5})));
    const Network p2 = fix::p2();
    EXPECT_TRUE(is_terminal(p2, fix::config_of(p2, {0, 1})));
}

TEST(Legitimate, Examples) {
    const Network p3 = fix::p3();
    EXPECT_TRUE(is_legitimate(p3, fix::config_of(p3, {0, 1, 2}, {0, 0, 1})));
    EXPECT_FALSE(is_legitimate(p3, fix::config_of(p3, {0, 1, 2}, {0, 2, 1})));
    const Network triangle = generate(NetworkKind::Complete, 3);
    EXPECT_TRUE(is_legitimate(triangle, fix::config_of(triangle, {0, 1, 1}, {0, 0, 0})));
}

TEST(Legitimate, EquivalentToTerminalOnSmallInstances) {
    for (const Network& net : enumerate_networks(3)) {
        for (const Configuration& cfg : enumerate_initial_configs(net, 3)) {
            EXPECT_EQ(is_terminal(net, cfg), is_legitimate(net, cfg))
                << "nodes=" << net.node_count();
        }
    }
}

TEST(Configuration, HashAgreesWithEquality) {
    const Network p3 = fix::p3();
    const Configuration a = fix::config_of(p3, {0, 1, 2});
    const Configuration b = fix::config_of(p3, {0, 1, 2});
    const Configuration c = fix::config_of(p3, {0, 1, 3});
    const Configuration d = fix::config_of(p3, {0, 1, 2}, {0, 2, 1});
    const ConfigurationHash h;
    EXPECT_EQ(a, b);
    EXPECT_EQ(h(a), h(b));
    EXPECT_NE(a, c);
    EXPECT_NE(a, d);
    EXPECT_NE(h(a), h(c));
    EXPECT_NE(h(a), h(d));
}

TEST(ZeroConfiguration, ParentDefaultsToFirstChannel) {
    const Network p3 = fix::p3();
    const Configuration cfg = zero_configuration(p3);
    EXPECT_EQ(cfg[1].par, 0u);
    EXPECT_EQ(cfg[2].par, 1u);
    const Network singleton = generate(NetworkKind::Path, 1);
    EXPECT_EQ(zero_configuration(singleton)[0].par, 0u);
}
