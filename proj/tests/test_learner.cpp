#include <gtest/gtest.h>

#include <numeric>

#include "crb/demand_response.hpp"
#include "crb/learner.hpp"
#include "crb/random_instance.hpp"
#include "crb/rng.hpp"
#include "oracles.hpp"

using namespace crb;

namespace {

CrbInstance small_instance() {
    RandomInstanceSpec spec;
    spec.num_arms = 3;
    spec.num_contexts = 2;
    spec.num_states = 2;
    spec.budget = 1;
    return random_instance(spec, 5);
}

CrbInstance homogeneous_dr(int n = 10) {
    dr::DrConfig cfg;
    cfg.num_users = n;
    cfg.load_low = cfg.load_high = 10.0;
    return dr::build_dr_instance(cfg);
}

}  // namespace

TEST(EmpiricalModel, OneObservationGivesTwoThirds) {
    auto m = EmpiricalModel::empty(1, 2);
    m.record(0, 0, 1, 1);
    const auto est = m.estimate(ArmModel(1, 2), Estimator::laplace);
    EXPECT_DOUBLE_EQ(est.prob(0, 0, 1, 1), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(est.prob(0, 0, 1, 0), 1.0 / 3.0);
}

TEST(EmpiricalModel, UnvisitedTuplesAreUniform) {
    const auto m = EmpiricalModel::empty(2, 5);
    for (auto e : {Estimator::laplace, Estimator::raw}) {
        const auto est = m.estimate(ArmModel(2, 5), e);
        for (int g = 0; g < 2; ++g)
            for (int s = 0; s < 5; ++s)
                for (int a = 0; a < 2; ++a)
                    for (int s2 = 0; s2 < 5; ++s2) EXPECT_DOUBLE_EQ(est.prob(g, s, static_cast<Action>(a), s2), 0.2);
    }
}

TEST(EmpiricalModel, HundredVisitsToOneSuccessor) {
    auto m = EmpiricalModel::empty(1, 2);
    for (int k = 0; k < 100; ++k) m.record(0, 1, 0, 0);
    const auto est = m.estimate(ArmModel(1, 2), Estimator::laplace);
    EXPECT_DOUBLE_EQ(est.prob(0, 1, 0, 0), 101.0 / 102.0);
    EXPECT_NEAR(est.prob(0, 1, 0, 0), 0.9902, 5e-5);
}

TEST(EmpiricalModel, RawRatioOnVisitedTuples) {
    auto m = EmpiricalModel::empty(1, 3);
    const int counts[3] = {3, 0, 4};
    for (int s2 = 0; s2 < 3; ++s2)
        for (int k = 0; k < counts[s2]; ++k) m.record(0, 2, 1, s2);
    const auto est = m.estimate(ArmModel(1, 3), Estimator::raw);
    for (int s2 = 0; s2 < 3; ++s2) EXPECT_DOUBLE_EQ(est.prob(0, 2, 1, s2), counts[s2] / 7.0);
}

TEST(EmpiricalModel, RewardsCopiedFromSkeleton) {
    const auto inst = small_instance();
    const auto est = EmpiricalModel::empty(2, 2).estimate(inst.arms[1], Estimator::laplace);
    for (int g = 0; g < 2; ++g)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                EXPECT_EQ(est.reward(g, s, static_cast<Action>(a)), inst.arms[1].reward(g, s, static_cast<Action>(a)));
}

TEST(EmpiricalModel, ConcentratesAtTenThousandSamples) {
    const auto inst = homogeneous_dr();
    const auto row = inst.arms[0].row(2, 3, 1);
    const std::vector<double> p(row.begin(), row.end());
    int within = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(77, static_cast<std::uint64_t>(t)));
        auto m = EmpiricalModel::empty(1, inst.num_states());
        for (int k = 0; k < 10'000; ++k) m.record(0, 0, 0, rng.categorical(p));
        const auto est = m.estimate(ArmModel(1, inst.num_states()), Estimator::laplace);
        const auto q = est.row(0, 0, 0);
        within += oracle::tv(std::vector<double>(q.begin(), q.end()), p) <= 0.05 ? 1 : 0;
    }
    EXPECT_GE(within, trials * 99 / 100);
}

TEST(Learner, EpsilonSchedule) {
    LearnerOptions o;
    EXPECT_EQ(epsilon_for_epoch(o, 0), 1.0);
    EXPECT_EQ(epsilon_for_epoch(o, 1), 0.5);
    EXPECT_EQ(epsilon_for_epoch(o, 9), 0.1);
    o.epsilon0 = 3.0;
    EXPECT_EQ(epsilon_for_epoch(o, 0), 1.0);
    EXPECT_EQ(epsilon_for_epoch(o, 5), 0.5);
}

TEST(Learner, InitialEstimatesAreUniformAndTvBounded) {
    const auto inst = homogeneous_dr();
    const auto st = init_learner(inst, {});
    const auto est = estimated_instance(st);
    const int S = inst.num_states();
    for (const auto& arm : est.arms)
        for (int g = 0; g < inst.num_contexts(); ++g)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < 2; ++a)
                    for (int s2 = 0; s2 < S; ++s2) EXPECT_DOUBLE_EQ(arm.prob(g, s, static_cast<Action>(a), s2), 1.0 / S);
    // Every tuple qualifies at min_visits = 0.
    EXPECT_LE(max_tv_error(st, inst, 0), 1.0 - 1.0 / S);
}

TEST(Learner, SymmetricInstanceGivesIdenticalTablesAtEpochZero) {
    auto st = init_learner(homogeneous_dr(), {});
    plan_epoch(st);
    ASSERT_EQ(st.q_tables.size(), 10u);
    for (const auto& q : st.q_tables) EXPECT_EQ(q.values, st.q_tables[0].values);
}

TEST(Learner, ExploitEqualsIndexDecisionOnStoredTables) {
    const auto inst = small_instance();
    LearnerOptions o;
    o.seed = 4;
    auto st = init_learner(inst, o);
    plan_epoch(st);
    st.epsilon = 0.0;
    const std::vector<StateId> states = {1, 0, 1};
    std::vector<Action> out(3);
    for (int g = 0; g < 2; ++g) {
        EXPECT_FALSE(act(st, g, states, out));
        const auto expect = select_arms(compute_indices(st.q_tables, g, states), inst.chain.budgets[static_cast<std::size_t>(g)]);
        EXPECT_EQ(out, expect);
    }
}

TEST(Learner, FullExplorationActivatesEachArmAtBudgetRate) {
    const auto inst = homogeneous_dr(10);  // C = 2
    auto st = init_learner(inst, {});
    ASSERT_EQ(st.epsilon, 1.0);
    std::vector<StateId> states(10, 0);
    std::vector<Action> out(10);
    std::vector<long> hits(10, 0);
    const int draws = 20'000;
    for (int k = 0; k < draws; ++k) {
        EXPECT_TRUE(act(st, 0, states, out));
        EXPECT_EQ(std::accumulate(out.begin(), out.end(), 0), 2);
        for (int i = 0; i < 10; ++i) hits[static_cast<std::size_t>(i)] += out[static_cast<std::size_t>(i)];
    }
    // Binomial(20000, 0.2): sd ~ 57.
    for (long h : hits) EXPECT_NEAR(static_cast<double>(h) / draws, 0.2, 0.015);
}

TEST(Learner, ActNeverExceedsBudget) {
    const auto inst = small_instance();
    LearnerOptions o;
    o.epsilon0 = 0.5;
    auto st = init_learner(inst, o);
    plan_epoch(st);
    std::vector<Action> out(3);
    Rng rng(8);
    for (int k = 0; k < 500; ++k) {
        const std::vector<StateId> states = {static_cast<StateId>(rng.below(2)), static_cast<StateId>(rng.below(2)),
                                             static_cast<StateId>(rng.below(2))};
        const int g = static_cast<int>(rng.below(2));
        act(st, g, states, out);
        EXPECT_LE(std::accumulate(out.begin(), out.end(), 0), inst.chain.budgets[static_cast<std::size_t>(g)]);
    }
}

TEST(Learner, ActBeforePlanningThrowsOnExploit) {
    auto st = init_learner(small_instance(), {});
    st.epsilon = 0.0;
    std::vector<StateId> states(3, 0);
    std::vector<Action> out(3);
    EXPECT_THROW(act(st, 0, states, out), std::logic_error);
}

TEST(Learner, ObserveRejectsWrongDimensions) {
    auto st = init_learner(small_instance(), {});
    std::vector<StateId> s(2, 0), s3(3, 0);
    std::vector<Action> a(3, 0);
    EXPECT_THROW(observe(st, 0, s, a, s3), std::invalid_argument);
}

TEST(Learner, CountConservationAndValidRows) {
    const auto inst = small_instance();
    LearnerOptions o;
    o.epoch_length = 40;
    o.seed = 9;
    const auto run = run_online(inst, o, 5);
    ASSERT_EQ(run.final_state.models.size(), 3u);
    for (const auto& m : run.final_state.models) {
        EXPECT_EQ(std::accumulate(m.visits.begin(), m.visits.end(), 0L), 200L);
        EXPECT_EQ(std::accumulate(m.transitions.begin(), m.transitions.end(), 0L), 200L);
    }
    const auto est = estimated_instance(run.final_state);
    EXPECT_TRUE(validate_instance(est).empty());
    EXPECT_EQ(run.final_state.epoch, 5);
    EXPECT_EQ(run.epochs.size(), 5u);
}

TEST(Learner, PooledCountsSumOverArms) {
    const auto inst = homogeneous_dr(10);
    LearnerOptions o;
    o.epoch_length = 30;
    o.pool_arms = true;
    const auto run = run_online(inst, o, 3);
    ASSERT_EQ(run.final_state.models.size(), 1u);
    const auto& v = run.final_state.models[0].visits;
    EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0L), 900L);
    EXPECT_TRUE(estimated_instance(run.final_state).homogeneous);
}

TEST(Learner, ReproducibleUnderFixedSeed) {
    const auto inst = small_instance();
    LearnerOptions o;
    o.epoch_length = 25;
    o.seed = 31;
    const auto a = run_online(inst, o, 4, true), b = run_online(inst, o, 4, true);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        EXPECT_EQ(a.trace[k].reward_sum, b.trace[k].reward_sum);
        EXPECT_EQ(a.trace[k].exploring, b.trace[k].exploring);
        EXPECT_EQ(a.trace[k].g, b.trace[k].g);
    }
    EXPECT_EQ(a.final_state.models[0].transitions, b.final_state.models[0].transitions);
}

TEST(Learner, TvErrorShrinksWithData) {
    const auto inst = homogeneous_dr(10);
    LearnerOptions o;
    o.epoch_length = 1500;
    o.pool_arms = true;
    const auto run = run_online(inst, o, 10);
    long qualifying = 0;
    const double tv = max_tv_error(run.final_state, inst, 5000, &qualifying);
    ASSERT_GT(qualifying, 0);
    EXPECT_LE(tv, 0.05);
}

TEST(Learner, EstimatorNames) {
    EXPECT_EQ(estimator_from_string("laplace"), Estimator::laplace);
    EXPECT_EQ(estimator_from_string("raw"), Estimator::raw);
    EXPECT_EQ(to_string(Estimator::raw), "raw");
    EXPECT_THROW(estimator_from_string("mle"), std::invalid_argument);
}
