#include <gtest/gtest.h>

#include <limits>

#include "crb/demand_response.hpp"
#include "crb/dual_solver.hpp"
#include "crb/random_instance.hpp"
#include "crb/simulator.hpp"

using namespace crb;

TEST(Multipliers, ProjectedStep) {
    const MultiplierVector lambda({1.0, 0.2, 0.0});
    const std::vector<double> slack{0.5, -1.0, -3.0};
    const auto next = update_multipliers(lambda, slack, 0.5);
    EXPECT_DOUBLE_EQ(next[0], 1.25);
    EXPECT_DOUBLE_EQ(next[1], 0.0);
    EXPECT_DOUBLE_EQ(next[2], 0.0);
    EXPECT_THROW(update_multipliers(lambda, slack, 0.0), std::invalid_argument);
}

TEST(Multipliers, ZeroSlackIsAFixedPoint) {
    const MultiplierVector lambda({0.7, 2.0});
    EXPECT_EQ(update_multipliers(lambda, std::vector<double>{0.0, 0.0}, 1.0), lambda);
}

TEST(Dual, NonBindingBudgetGivesZeroMultipliers) {
    RandomInstanceSpec spec;
    spec.num_arms = 3;
    spec.budget = 3;
    const auto inst = random_instance(spec, 5);
    const auto rep = solve_dual(inst);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1);
    for (double l : rep.lambda_star.values) EXPECT_EQ(l, 0.0);
}

TEST(Dual, InfiniteEpsilonStopsAfterOneIteration) {
    const auto inst = random_instance({}, 6);
    DualOptions opts;
    opts.epsilon = std::numeric_limits<double>::infinity();
    const auto rep = solve_dual(inst, opts);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1);
}

TEST(Dual, ObjectiveBoundsTheExactPrimalAtEveryIterate) {
    // Rewards are nonnegative, so the 6-step primal optimum is below the
    // infinite-horizon one, which every dual value bounds.
    const auto inst = random_instance({}, 7);
    const double primal = brute_force_primal(inst, 6);
    const auto rep = solve_dual(inst);
    ASSERT_TRUE(rep.converged);
    for (const auto& it : rep.history) EXPECT_GE(it.dual_objective, primal);
    EXPECT_GE(rep.relaxed_value, primal);
}

TEST(Dual, DemandResponseDeskConverges) {
    dr::DrConfig cfg;
    const auto inst = dr::build_dr_instance(cfg);
    const auto rep = solve_dual(inst);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 200);
    const auto [lo, hi] = std::minmax_element(rep.lambda_star.values.begin(), rep.lambda_star.values.end());
    EXPECT_GT(*hi - *lo, 1e-3);
    // Complementary slackness up to the dual tolerance: positive multipliers sit on nearly tight budgets.
    for (std::size_t g = 0; g < rep.lambda_star.size(); ++g)
        if (rep.lambda_star[g] > 0.0) {
            EXPECT_LT(std::abs(rep.final_slack[g]), 0.1 * inst.num_arms());
        }
}

TEST(Dual, HarmonicScheduleStepSizes) {
    StepSchedule s;
    s.kind = StepSchedule::Kind::harmonic;
    EXPECT_DOUBLE_EQ(s.harmonic_step(0), 1.0);
    EXPECT_DOUBLE_EQ(s.harmonic_step(10), 0.5);
    const auto inst = random_instance({}, 8);
    DualOptions opts;
    opts.step = s;
    opts.max_iters = 5;
    const auto rep = solve_dual(inst, opts);
    ASSERT_EQ(rep.history.size(), 5u);
    for (const auto& it : rep.history) EXPECT_DOUBLE_EQ(it.step[0], s.harmonic_step(it.iteration));
}

TEST(Dual, SerialAndParallelAgreeExactly) {
    RandomInstanceSpec spec;
    spec.num_arms = 6;
    spec.num_contexts = 3;
    spec.num_states = 4;
    spec.budget = 2;
    const auto inst = random_instance(spec, 9);
    DualOptions a, b;
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    const auto ra = solve_dual(inst, a), rb = solve_dual(inst, b);
    EXPECT_EQ(ra.iterations, rb.iterations);
    EXPECT_EQ(ra.lambda_star, rb.lambda_star);
    EXPECT_EQ(ra.relaxed_value, rb.relaxed_value);
}

TEST(Dual, WarmStartFromOptimumStopsQuickly) {
    const auto inst = random_instance({}, 10);
    const auto cold = solve_dual(inst);
    DualOptions opts;
    opts.initial_lambda = cold.lambda_star;
    const auto warm = solve_dual(inst, opts);
    EXPECT_TRUE(warm.converged);
    EXPECT_LE(warm.iterations, cold.iterations);
    EXPECT_THROW(
        [&] {
            DualOptions bad;
            bad.initial_lambda = MultiplierVector({1.0, 2.0, 3.0});
            solve_dual(inst, bad);
        }(),
        std::invalid_argument);
}

TEST(Dual, HomogeneousArmsShareOneSolve) {
    RandomInstanceSpec spec;
    spec.num_arms = 4;
    spec.homogeneous = true;
    spec.budget = 1;
    const auto inst = random_instance(spec, 11);
    const auto rep = solve_dual(inst);
    for (const auto& sol : rep.per_arm) EXPECT_EQ(sol.values.values, rep.per_arm[0].values.values);
}
