#pragma once

// Dual decomposition of the budget-relaxed problem. Each iteration solves all
// arm subproblems at the current multipliers, evaluates the exact per-context
// constraint slack from the occupancy tables and takes a projected subgradient
// step lambda_g <- max(0, lambda_g + delta_k * slack_g).

#include <span>
#include <string>
#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/model.hpp"
#include "crb/occupancy.hpp"
#include "crb/parallel.hpp"

namespace crb {

struct StepSchedule {
    enum class Kind {
        harmonic,  // delta_k = delta0 / (1 + k / kappa)
        adaptive,  // per-context steps: times `shrink` when the slack changes sign, times `grow` otherwise
    };
    Kind kind = Kind::adaptive;
    double delta0 = 1.0;
    double kappa = 10.0;
    double shrink = 0.5;
    double grow = 1.2;

    double harmonic_step(int k) const { return delta0 / (1.0 + k / kappa); }
};

std::string to_string(StepSchedule::Kind kind);
StepSchedule::Kind step_kind_from_string(const std::string& name);

struct DualOptions {
    StepSchedule step;
    double epsilon = 1e-4;  // stop once ||lambda_k - lambda_{k-1}||_inf <= epsilon
    int max_iters = 200;
    ArmSolveOptions arm;
    bool warm_start = true;
    Exec exec = Exec::parallel;
    MultiplierVector initial_lambda;  // empty means start from zero
};

struct ArmSolution {
    ValueTable values;
    QTable q;
    ArmPolicy policy;
};

struct DualIteration {
    int iteration = 0;
    MultiplierVector lambda;    // multipliers the arms were solved at
    std::vector<double> slack;  // subgradient at `lambda`
    std::vector<double> step;   // per-context step used to leave `lambda`
    double delta_norm = 0.0;    // ||lambda_{k+1} - lambda_k||_inf
    double dual_objective = 0.0;
};

struct DualSolveReport {
    MultiplierVector lambda_star;
    std::vector<ArmSolution> per_arm;
    std::vector<DualIteration> history;
    int iterations = 0;
    bool converged = false;
    double epsilon = 0.0;
    ContextOccupancy B;
    std::vector<double> final_slack;  // slack of the per-arm policies at lambda_star
    double relaxed_value = 0.0;       // dual objective at lambda_star
};

/// lambda'_g = max(0, lambda_g + step_g * slack_g).
MultiplierVector update_multipliers(const MultiplierVector& lambda, std::span<const double> slack,
                                    std::span<const double> step);
MultiplierVector update_multipliers(const MultiplierVector& lambda, std::span<const double> slack, double step);

// Kernels: solve every arm subproblem at `lambda` (OpenMP over arms, or serially).
// `warm` may be empty; otherwise it holds one solution per arm to warm-start from.
std::vector<ArmSolution> solve_arms_serial(const CrbInstance& instance, const MultiplierVector& lambda,
                                           const ArmSolveOptions& opts, std::span<const ArmSolution> warm);
std::vector<ArmSolution> solve_arms_omp(const CrbInstance& instance, const MultiplierVector& lambda,
                                        const ArmSolveOptions& opts, std::span<const ArmSolution> warm);
std::vector<ArmSolution> solve_arms(const CrbInstance& instance, const MultiplierVector& lambda,
                                    const ArmSolveOptions& opts, std::span<const ArmSolution> warm, Exec exec);

std::vector<ActivationOccupancy> activation_occupancies(const CrbInstance& instance,
                                                        std::span<const ArmSolution> solutions, Exec exec);

/// Projected subgradient from lambda = 0 (or opts.initial_lambda). Non-convergence is reported, not thrown.
DualSolveReport solve_dual(const CrbInstance& instance, const DualOptions& opts = {});

/// Dual objective sum_i E[V_i(g0, s_i0)] + sum_g lambda_g C_g E[B_g(g0)].
double relaxed_value(const CrbInstance& instance, const MultiplierVector& lambda,
                     std::span<const ArmSolution> solutions, const ContextOccupancy& B,
                     const InitialDistribution& initial);

}  // namespace crb
