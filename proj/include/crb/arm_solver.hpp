#pragma once

// Single-arm subproblem: the lambda-penalized context-augmented MDP
//   V(g,s) = max_a [ R(g,s,a) - lambda_g a + beta sum_{g',s'} G(g'|g) P(s'|g,s,a) V(g',s') ].

#include <span>
#include <vector>

#include "crb/model.hpp"
#include "crb/parallel.hpp"

namespace crb {

struct ValueTable {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<double> values;  // (g, s)
    MultiplierVector lambda;
    int iterations = 0;

    double operator()(ContextId g, StateId s) const {
        return values[static_cast<std::size_t>(g) * num_states + s];
    }
    double& operator()(ContextId g, StateId s) { return values[static_cast<std::size_t>(g) * num_states + s]; }

    static ValueTable zeros(int num_contexts, int num_states, MultiplierVector lambda = {});
};

struct QTable {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<double> values;  // (g, s, a)

    double operator()(ContextId g, StateId s, Action a) const {
        return values[(static_cast<std::size_t>(g) * num_states + s) * kNumActions + a];
    }
    double& operator()(ContextId g, StateId s, Action a) {
        return values[(static_cast<std::size_t>(g) * num_states + s) * kNumActions + a];
    }
};

struct ArmPolicy {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<Action> actions;  // (g, s)

    Action operator()(ContextId g, StateId s) const {
        return actions[static_cast<std::size_t>(g) * num_states + s];
    }
    Action& operator()(ContextId g, StateId s) { return actions[static_cast<std::size_t>(g) * num_states + s]; }

    static ArmPolicy constant(int num_contexts, int num_states, Action a);
    bool operator==(const ArmPolicy&) const = default;
};

struct ArmSolveOptions {
    double tol = 1e-8;
    long max_iters = 1'000'000;
};

// Kernels. One Bellman sweep over every (g,s); returns sup |out - in|.
double bellman_sweep_serial(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                            double beta, std::span<const double> in, std::span<double> out);
double bellman_sweep_omp(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                         double beta, std::span<const double> in, std::span<double> out);

/// Value iteration from zero (or from `warm_start`) until the true Bellman
/// residual is at most `opts.tol`. The stopping rule is
/// ||V_{k+1} - V_k|| <= tol (1 - beta) / (2 beta), which bounds the residual of
/// V_{k+1} by beta ||V_{k+1} - V_k||.
ValueTable solve_arm_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                            double beta, const ArmSolveOptions& opts = {}, const ValueTable* warm_start = nullptr,
                            Exec exec = Exec::serial);

QTable q_from_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda, double beta,
                     const ValueTable& values);

/// a(g,s) = 1 iff Q(g,s,1) > Q(g,s,0); ties go to the passive action.
ArmPolicy greedy_policy(const QTable& q);

double bellman_residual(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda, double beta,
                        const ValueTable& values);

/// Optimal `horizon`-step values (horizon sweeps from zero).
ValueTable finite_horizon_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                                 double beta, int horizon);

}  // namespace crb
