#include <gtest/gtest.h>

#include "crb/demand_response.hpp"

using namespace crb;
using namespace crb::dr;

TEST(DemandResponse, RewardFormula) {
    EXPECT_DOUBLE_EQ(dr_reward(3, {1, 3}, 1, 10.0), 10.0);
    EXPECT_NEAR(dr_reward(6, {1, 1}, 1, 10.0), 10.0 / 26.0, 1e-15);
    EXPECT_NEAR(dr_reward(6, {1, 1}, 1, 10.0), 0.38462, 5e-6);
    EXPECT_DOUBLE_EQ(dr_reward(1, {1, 2}, 1, 8.0), 4.0);
}

TEST(DemandResponse, RewardZeroWhenPassiveOrUnresponsive) {
    for (int g = 1; g <= 6; ++g)
        for (int x = 1; x <= 4; ++x) {
            EXPECT_EQ(dr_reward(g, {1, x}, 0, 10.0), 0.0);
            EXPECT_EQ(dr_reward(g, {0, x}, 0, 10.0), 0.0);
            EXPECT_EQ(dr_reward(g, {0, x}, 1, 10.0), 0.0);
        }
}

TEST(DemandResponse, EncodeDecodeBijection) {
    std::vector<bool> seen(8, false);
    for (int x = 1; x <= 4; ++x)
        for (int z = 0; z < 2; ++z) {
            const StateId id = encode({z, x});
            ASSERT_GE(id, 0);
            ASSERT_LT(id, 8);
            EXPECT_FALSE(seen[static_cast<std::size_t>(id)]);
            seen[static_cast<std::size_t>(id)] = true;
            EXPECT_EQ(decode(id), (DrState{z, x}));
        }
}

TEST(DemandResponse, FatigueCapAtTop) {
    FatigueParams p;
    p.p_up = 1.0;
    const auto row = dr_transition(3, {1, 4}, 1, p, 4, 6);
    double at_top = 0.0;
    for (StateId s = 0; s < 8; ++s)
        if (decode(s).x == 4) at_top += row[static_cast<std::size_t>(s)];
    EXPECT_NEAR(at_top, 1.0, 1e-15);
}

TEST(DemandResponse, NoRecoveryWhenPDownIsZero) {
    FatigueParams p;
    p.p_down = 0.0;
    for (int x = 1; x <= 4; ++x)
        for (int z = 0; z < 2; ++z) {
            const auto row = dr_transition(2, {z, x}, 0, p, 4, 6);
            for (StateId s = 0; s < 8; ++s)
                if (decode(s).x != x) {
                    EXPECT_EQ(row[static_cast<std::size_t>(s)], 0.0);
                }
        }
}

TEST(DemandResponse, UnresponsiveActivationKeepsFatigue) {
    FatigueParams p;
    const auto row = dr_transition(4, {0, 2}, 1, p, 4, 6);
    for (StateId s = 0; s < 8; ++s)
        if (decode(s).x != 2) {
            EXPECT_EQ(row[static_cast<std::size_t>(s)], 0.0);
        }
}

TEST(DemandResponse, RowsSumToOneAndResponsivenessFallsWithFatigue) {
    const FatigueParams p;
    for (int g = 1; g <= 6; ++g) {
        for (int x = 1; x <= 4; ++x)
            for (int z = 0; z < 2; ++z)
                for (int a = 0; a < 2; ++a) {
                    const auto row = dr_transition(g, {z, x}, static_cast<Action>(a), p, 4, 6);
                    ASSERT_EQ(row.size(), 8u);
                    double sum = 0.0;
                    for (double v : row) {
                        EXPECT_GE(v, 0.0);
                        sum += v;
                    }
                    EXPECT_NEAR(sum, 1.0, 1e-12);
                }
        // P(z' = 1 | x') read off the rows of a resting user with p_down = 0.
        FatigueParams still = p;
        still.p_down = 0.0;
        double previous = 2.0;
        for (int x = 1; x <= 4; ++x) {
            const auto row = dr_transition(g, {0, x}, 0, still, 4, 6);
            const double pz = row[static_cast<std::size_t>(encode({1, x}))];
            EXPECT_LT(pz, previous);
            previous = pz;
        }
    }
}

TEST(DemandResponse, ResponsivenessCurve) {
    const FatigueParams p;
    EXPECT_NEAR(responsiveness(p, 1, 1, 6), 0.9 + 0.02 * (1 - 3.5), 1e-15);
    EXPECT_NEAR(responsiveness(p, 6, 4, 6), 0.9 - 0.6 + 0.02 * 2.5, 1e-15);
}

TEST(DemandResponse, PaperDefaultsAtFiveHundredUsers) {
    DrConfig cfg;
    cfg.num_users = 500;
    const auto inst = build_dr_instance(cfg);
    EXPECT_EQ(inst.num_contexts(), 6);
    EXPECT_EQ(inst.num_states(), 8);
    EXPECT_EQ(inst.num_arms(), 500);
    for (int c : inst.chain.budgets) EXPECT_EQ(c, 100);
    for (int g = 0; g < 6; ++g)
        for (int g2 = 0; g2 < 6; ++g2) EXPECT_DOUBLE_EQ(inst.chain.prob(g, g2), 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(inst.discount, 0.97);
    EXPECT_FALSE(inst.homogeneous);
    EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(DemandResponse, LoadsWithinRangeAndBakedIntoRewards) {
    DrConfig cfg;
    const auto loads = sample_loads(cfg);
    const auto inst = build_dr_instance(cfg);
    ASSERT_EQ(loads.size(), 50u);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        EXPECT_GE(loads[i], 8.0);
        EXPECT_LE(loads[i], 12.0);
        // g = 3 (index 2), x = 3, z = 1 has unit denominator.
        EXPECT_DOUBLE_EQ(inst.arms[i].reward(2, encode({1, 3}), 1), loads[i]);
    }
}

TEST(DemandResponse, EqualLoadsGiveHomogeneousInstance) {
    DrConfig cfg;
    cfg.load_low = cfg.load_high = 10.0;
    const auto inst = build_dr_instance(cfg);
    EXPECT_TRUE(inst.homogeneous);
    for (const auto& arm : inst.arms) EXPECT_EQ(arm, inst.arms[0]);
}

TEST(DemandResponse, DeterministicForEqualSeeds) {
    DrConfig cfg;
    cfg.seed = 42;
    const auto a = build_dr_instance(cfg), b = build_dr_instance(cfg);
    ASSERT_EQ(a.arms.size(), b.arms.size());
    for (std::size_t i = 0; i < a.arms.size(); ++i) EXPECT_EQ(a.arms[i], b.arms[i]);
    cfg.seed = 43;
    EXPECT_NE(sample_loads(cfg), sample_loads(DrConfig{}));
}

TEST(DemandResponse, PerContextRatiosFloorBudgets) {
    DrConfig cfg;
    cfg.num_users = 7;
    cfg.selection_ratio = {0.1, 0.2, 0.3, 0.5, 1.0, 0.15};
    const auto inst = build_dr_instance(cfg);
    EXPECT_EQ(inst.chain.budgets, (std::vector<int>{0, 1, 2, 3, 7, 1}));
}

TEST(DemandResponse, ConfigValidation) {
    EXPECT_TRUE(validate_config(DrConfig{}).empty());
    DrConfig bad;
    bad.num_users = 0;
    bad.load_low = 12.0;
    bad.load_high = 8.0;
    bad.selection_ratio = {0.2, 0.2};
    EXPECT_GE(validate_config(bad).size(), 3u);
    EXPECT_THROW(build_dr_instance(bad), std::invalid_argument);
}
