#pragma once

// Epoch-based online learning when the arm transition kernels are unknown.
// Rewards, the context chain and the budgets are known. Each epoch freezes
// the current kernel estimates, solves the dual on them and then acts
// epsilon-greedily with the resulting index policy while counting every
// arm's observed transition, activated or not.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/dual_solver.hpp"
#include "crb/index_policy.hpp"
#include "crb/model.hpp"
#include "crb/rng.hpp"

namespace crb {

enum class Estimator {
    laplace,  // (M_s' + 1) / (M + |S|)
    raw,      // M_s' / M, uniform when M = 0
};

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct EmpiricalModel {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<long> visits;       // (g, s, a)
    std::vector<long> transitions;  // (g, s, a, s')

    static EmpiricalModel empty(int num_contexts, int num_states);

    long visit_count(ContextId g, StateId s, Action a) const {
        return visits[(static_cast<std::size_t>(g) * num_states + s) * kNumActions + a];
    }
    long transition_count(ContextId g, StateId s, Action a, StateId next) const {
        return transitions[((static_cast<std::size_t>(g) * num_states + s) * kNumActions + a) * num_states + next];
    }
    void record(ContextId g, StateId s, Action a, StateId next);

    /// Estimated P(.|g,s,a) for every tuple, rewards copied from `rewards_from`.
    ArmModel estimate(const ArmModel& rewards_from, Estimator estimator) const;
};

struct LearnerOptions {
    int epoch_length = 300;
    double epsilon0 = 1.0;  // epsilon_n = min(1, epsilon0 / (n + 1))
    Estimator estimator = Estimator::laplace;
    /// One count table shared by every arm. Only valid when the arms are
    /// known to share their transition kernel (rewards may still differ).
    bool pool_arms = false;
    DualOptions dual;
    SelectionOptions selection;
    /// Start each epoch's dual from the previous epoch's multipliers.
    bool warm_start_lambda = true;
    std::uint64_t seed = 1;
};

struct PlanEvent {
    int epoch = 0;
    bool converged = false;
    int iterations = 0;
};

struct LearnerState {
    CrbInstance skeleton;  // true rewards, chain, budgets; kernels unused
    LearnerOptions options;
    int epoch = 0;
    double epsilon = 1.0;
    std::vector<EmpiricalModel> models;  // one per arm, or a single pooled one
    MultiplierVector lambda;
    std::vector<QTable> q_tables;
    std::vector<PlanEvent> plan_log;
    Rng rng;

    const EmpiricalModel& model_for(std::size_t arm) const { return models.size() == 1 ? models[0] : models[arm]; }
};

double epsilon_for_epoch(const LearnerOptions& opts, int epoch);

/// Counts at zero, estimates uniform, epoch 0. The skeleton's kernels are
/// never read.
LearnerState init_learner(const CrbInstance& skeleton, const LearnerOptions& opts);

/// The instance the learner currently believes in.
CrbInstance estimated_instance(const LearnerState& state);

/// Solves the dual on the current estimates and stores lambda and the Q-tables.
/// On non-convergence the last iterate is kept and the event logged.
void plan_epoch(LearnerState& state);

/// Epsilon-greedy index decision. Returns true when the step explored.
bool act(LearnerState& state, ContextId g, std::span<const StateId> states, std::span<Action> out);

void observe(LearnerState& state, ContextId g, std::span<const StateId> states, std::span<const Action> actions,
             std::span<const StateId> next_states);

void end_epoch(LearnerState& state);

struct EpochSummary {
    int epoch = 0;
    double epsilon = 0.0;
    double discounted_reward = 0.0;  // sum_t beta^(t - epoch start) sum_i r_{i,t}
    double mean_step_reward = 0.0;
    double tv_error = 0.0;           // over tuples visited at least once, after the epoch
    long explored_steps = 0;
    bool plan_converged = false;
    int plan_iterations = 0;
    MultiplierVector lambda;
};

struct LearnerTraceRow {
    long t = 0;
    int epoch = 0;
    double epsilon = 0.0;
    ContextId g = 0;
    double reward_sum = 0.0;
    bool exploring = false;
};

struct OnlineRun {
    std::vector<EpochSummary> epochs;
    std::vector<LearnerTraceRow> trace;  // empty unless requested
    LearnerState final_state;
};

/// Environment seed of an online run; shared with fixed-policy reference runs.
std::uint64_t online_env_seed(std::uint64_t seed);

/// Runs `epochs` epochs of plan / act / observe on the true instance, which is
/// only used to generate transitions and to score the estimates.
OnlineRun run_online(const CrbInstance& truth, const LearnerOptions& opts, int epochs, bool keep_trace = false);

/// Largest total-variation distance between the estimated and the true row,
/// over tuples (arm, g, s, a) visited at least `min_visits` times. With pooled
/// counts, arm 0's truth is used. Returns -1 when no tuple qualifies.
double max_tv_error(const LearnerState& state, const CrbInstance& truth, long min_visits, long* qualifying = nullptr);

}  // namespace crb
