#include <gtest/gtest.h>

#include "crb/demand_response.hpp"
#include "crb/dual_solver.hpp"
#include "crb/random_instance.hpp"
#include "crb/relaxed_policy.hpp"
#include "crb/simulator.hpp"

using namespace crb;

namespace {

CrbInstance homogeneous_desk() {
    dr::DrConfig cfg;
    cfg.load_low = cfg.load_high = 10.0;
    return dr::build_dr_instance(cfg);
}

}  // namespace

TEST(RelaxedPolicy, OccupancyIsAStationaryDistribution) {
    const auto inst = homogeneous_desk();
    const auto rep = solve_dual(inst);
    const auto sol = stationary_relaxed_policy(inst, rep.per_arm[0].policy);
    const int G = inst.num_contexts(), S = inst.num_states();
    auto mu = [&](int g, int s, int a) { return sol.occupancy[static_cast<std::size_t>((g * S + s) * 2 + a)]; };
    double total = 0.0;
    for (double x : sol.occupancy) {
        EXPECT_GE(x, 0.0);
        total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int g2 = 0; g2 < G; ++g2)
        for (int s2 = 0; s2 < S; ++s2) {
            double inflow = 0.0;
            for (int g = 0; g < G; ++g)
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < 2; ++a)
                        inflow += mu(g, s, a) * inst.chain.prob(g, g2) * inst.arms[0].prob(g, s, static_cast<Action>(a), s2);
            EXPECT_NEAR(mu(g2, s2, 0) + mu(g2, s2, 1), inflow, 1e-12);
        }
}

TEST(RelaxedPolicy, ActivationFractionWithinBudget) {
    const auto inst = homogeneous_desk();
    const auto sol = stationary_relaxed_policy(inst, solve_dual(inst).per_arm[0].policy);
    for (int g = 0; g < inst.num_contexts(); ++g)
        EXPECT_LE(sol.activation_fraction[static_cast<std::size_t>(g)],
                  double(inst.chain.budgets[static_cast<std::size_t>(g)]) / inst.num_arms() + 1e-12);
}

TEST(RelaxedPolicy, ExactSteadyStateMatchesLpMarginals) {
    const auto inst = homogeneous_desk();
    const auto sol = stationary_relaxed_policy(inst, solve_dual(inst).per_arm[0].policy);
    const auto m = exact_steady_state(inst, sol.policy);
    for (std::size_t k = 0; k < sol.steady_state.size(); ++k) EXPECT_NEAR(m.dist[k], sol.steady_state[k], 1e-9);
}

TEST(RelaxedPolicy, BeatsEveryFeasibleDeterministicPolicyOnSmallArm) {
    // Enumerate all deterministic policies of a 2x2 arm; the LP reward rate
    // must dominate the best budget-feasible one.
    RandomInstanceSpec spec;
    spec.num_arms = 2;
    spec.budget = 1;
    spec.homogeneous = true;
    const auto inst = random_instance(spec, 21);
    const auto sol = stationary_relaxed_policy(inst, ArmPolicy::constant(2, 2, 0));
    double best = -1e300;
    for (int mask = 0; mask < 16; ++mask) {
        ArmPolicy p = ArmPolicy::constant(2, 2, 0);
        for (int k = 0; k < 4; ++k) p.actions[static_cast<std::size_t>(k)] = (mask >> k) & 1;
        const auto rp = RandomizedArmPolicy::from(p);
        const auto m = exact_steady_state(inst, rp);
        const auto h = stationary_context_distribution(inst.chain);
        bool feasible = true;
        double rate = 0.0;
        for (int g = 0; g < 2; ++g) {
            double frac = 0.0;
            for (int s = 0; s < 2; ++s) {
                frac += m.row(g)[static_cast<std::size_t>(s)] * p(g, s);
                rate += h[static_cast<std::size_t>(g)] * m.row(g)[static_cast<std::size_t>(s)] *
                        inst.arms[0].reward(g, s, p(g, s));
            }
            feasible = feasible && frac <= 0.5 + 1e-12;
        }
        if (feasible) best = std::max(best, rate);
    }
    EXPECT_GE(sol.reward_rate, best - 1e-12);
}

TEST(RelaxedPolicy, RequiresHomogeneousInstance) {
    dr::DrConfig cfg;
    const auto inst = dr::build_dr_instance(cfg);
    EXPECT_THROW(stationary_relaxed_policy(inst, ArmPolicy::constant(6, 8, 0)), std::invalid_argument);
}

TEST(RelaxedPolicy, BudgetHoldsAtExactSteadyState) {
    const auto inst = homogeneous_desk();
    const auto sol = stationary_relaxed_policy(inst, solve_dual(inst).per_arm[0].policy);
    const auto m = exact_steady_state(inst, sol.policy);
    for (const auto& row : check_steady_activations(inst, m, sol.policy, 4000, 3)) EXPECT_TRUE(row.pass) << "context " << row.g;
}
