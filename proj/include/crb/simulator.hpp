#pragma once

// Stochastic CRB environment and evaluation tools.
//
// Random streams for one run (seed r): the context chain draws from
// child(r, kContextStream), arm i from child(r, kArmStreamBase + i) and the
// policy from child(r, kPolicyStream). Each step consumes exactly one uniform
// per arm and one for the context, whatever the actions, so two policies run
// with the same seed see the same context path and the same transition noise.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/model.hpp"
#include "crb/parallel.hpp"
#include "crb/policy.hpp"
#include "crb/relaxed_policy.hpp"
#include "crb/rng.hpp"

namespace crb {

struct EnvState {
    int t = 0;
    ContextId g = 0;
    std::vector<StateId> states;
    Rng context_rng;
    std::vector<Rng> arm_rng;
    Rng policy_rng;
};

/// Draws (g0, s_0) from the instance's initial distribution.
EnvState reset(const CrbInstance& instance, std::uint64_t run_seed);

/// Starts from a given condition; the streams are the same as in reset().
EnvState reset_at(const CrbInstance& instance, std::uint64_t run_seed, ContextId g0, std::vector<StateId> states);

/// Applies `actions`, writes per-arm rewards and advances the state.
/// Throws std::invalid_argument when sum(actions) > C_g or an action is not 0/1.
void step(const CrbInstance& instance, EnvState& env, std::span<const Action> actions, std::span<double> rewards);

struct StepRecord {
    int t = 0;
    ContextId g = 0;
    std::vector<StateId> states;
    std::vector<Action> actions;
    std::vector<double> rewards;
};

struct TrajectoryLog {
    std::vector<StepRecord> steps;  // empty when recording is off
    std::vector<ContextId> contexts;  // g_t for every step, always recorded
    double discounted_total = 0.0;
    double undiscounted_total = 0.0;
    int horizon = 0;
    /// Bound on |infinite-horizon value - discounted_total| in expectation:
    /// beta^T N r_max / (1 - beta).
    double truncation_bound = 0.0;
};

double truncation_bound(const CrbInstance& instance, int horizon);

TrajectoryLog rollout(const CrbInstance& instance, const Policy& policy, int horizon, std::uint64_t run_seed,
                      bool record_steps = true);

/// One continuing run of `epochs * epoch_length` steps; entry e is
/// sum over epoch e of beta^(t - epoch start) sum_i r_{i,t}.
std::vector<double> epoch_rewards(const CrbInstance& instance, const Policy& policy, int epochs, int epoch_length,
                                  std::uint64_t run_seed);

struct MonteCarloResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> totals;  // per run, in run order
    double truncation_bound = 0.0;
};

/// Kernels: run r uses seed derive_seed(seed, r). Totals are reduced in run
/// order, so both produce identical results.
MonteCarloResult monte_carlo_value_serial(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                          std::uint64_t seed);
MonteCarloResult monte_carlo_value_omp(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                       std::uint64_t seed);
/// Throws std::invalid_argument when runs < 2.
MonteCarloResult monte_carlo_value(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                   std::uint64_t seed, Exec exec = Exec::parallel);

/// Sample mean and standard error of the mean.
void mean_and_stderr(std::span<const double> xs, double& mean, double& se);

/// m*_g(s), row-major (g, s).
struct SteadyState {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<double> dist;
    std::vector<long> visits;  // samples per context

    std::span<const double> row(ContextId g) const {
        return {dist.data() + static_cast<std::size_t>(g) * num_states, static_cast<std::size_t>(num_states)};
    }
};

/// Long-run frequencies of s given g for one arm (arm 0) following
/// `policy` alone, i.e. the relaxed policy with no budget coupling.
/// Throws std::runtime_error naming every context with fewer than
/// `min_per_context` samples.
SteadyState estimate_steady_state(const CrbInstance& instance, const RandomizedArmPolicy& policy, long burn_in,
                                  long samples, std::uint64_t seed, long min_per_context = 100);
SteadyState estimate_steady_state(const CrbInstance& instance, const ArmPolicy& policy, long burn_in, long samples,
                                  std::uint64_t seed, long min_per_context = 100);

/// Exact m*_g from the stationary distribution of the (g, s) chain that one
/// arm follows under `policy`, by a dense linear solve. Assumes that chain has
/// a single recurrent class.
SteadyState exact_steady_state(const CrbInstance& instance, const RandomizedArmPolicy& policy);

/// Total-variation distance between two steady states, maximized over contexts.
double max_tv_distance(const SteadyState& a, const SteadyState& b);

struct ActivationRow {
    ContextId g = 0;
    double mean_activations = 0.0;
    double std_error = 0.0;
    int budget = 0;
    bool pass = false;
};

/// For each context: draw N arm states i.i.d. from m*_g, count activations
/// of the relaxed policy, repeat `samples` times. Passes iff
/// mean <= C_g + 3 stderr.
std::vector<ActivationRow> check_steady_activations(const CrbInstance& instance, const SteadyState& m,
                                    const RandomizedArmPolicy& policy, long samples, std::uint64_t seed);
std::vector<ActivationRow> check_steady_activations(const CrbInstance& instance, const SteadyState& m, const ArmPolicy& policy,
                                    long samples, std::uint64_t seed);

inline constexpr long kBruteForceMaxJointStates = 100'000;
inline constexpr int kBruteForceMaxHorizon = 6;

/// Joint state-space size |G| |S|^N, saturating at LONG_MAX.
long joint_state_count(const CrbInstance& instance);

/// Optimal `horizon`-step discounted reward of the budget-constrained problem
/// by backward induction over the joint (g, s_1..s_N) space, maximizing over
/// every action subset with at most C_g activations. Expectation over the
/// instance's initial distribution. Throws std::invalid_argument when the
/// joint space exceeds 1e5 states or horizon > 6.
double brute_force_primal(const CrbInstance& instance, int horizon);

}  // namespace crb
