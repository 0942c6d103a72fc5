#include "crb/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crb {

std::string to_string(StepSchedule::Kind kind) {
    return kind == StepSchedule::Kind::harmonic ? "harmonic" : "adaptive";
}

StepSchedule::Kind step_kind_from_string(const std::string& name) {
    if (name == "harmonic") return StepSchedule::Kind::harmonic;
    if (name == "adaptive") return StepSchedule::Kind::adaptive;
    throw std::invalid_argument("unknown step schedule '" + name + "' (expected harmonic or adaptive)");
}

MultiplierVector update_multipliers(const MultiplierVector& lambda, std::span<const double> slack,
                                    std::span<const double> step) {
    MultiplierVector next = lambda;
    for (std::size_t g = 0; g < next.size(); ++g) next[g] = std::max(0.0, lambda[g] + step[g] * slack[g]);
    return next;
}

MultiplierVector update_multipliers(const MultiplierVector& lambda, std::span<const double> slack, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("update_multipliers: step must be positive");
    std::vector<double> steps(lambda.size(), step);
    return update_multipliers(lambda, slack, steps);
}

namespace {

ArmSolution solve_one(const CrbInstance& instance, std::size_t i, const MultiplierVector& lambda,
                      const ArmSolveOptions& opts, std::span<const ArmSolution> warm) {
    const auto& arm = instance.arms[i];
    const ValueTable* start = warm.size() > i ? &warm[i].values : nullptr;
    ArmSolution sol;
    sol.values = solve_arm_values(arm, instance.chain, lambda, instance.discount, opts, start, Exec::serial);
    sol.q = q_from_values(arm, instance.chain, lambda, instance.discount, sol.values);
    sol.policy = greedy_policy(sol.q);
    return sol;
}

}  // namespace

std::vector<ArmSolution> solve_arms_serial(const CrbInstance& instance, const MultiplierVector& lambda,
                                           const ArmSolveOptions& opts, std::span<const ArmSolution> warm) {
    const auto n = instance.arms.size();
    std::vector<ArmSolution> out(n);
    if (instance.homogeneous && n > 0) {
        out[0] = solve_one(instance, 0, lambda, opts, warm);
        std::fill(out.begin() + 1, out.end(), out[0]);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = solve_one(instance, i, lambda, opts, warm);
    return out;
}

std::vector<ArmSolution> solve_arms_omp(const CrbInstance& instance, const MultiplierVector& lambda,
                                        const ArmSolveOptions& opts, std::span<const ArmSolution> warm) {
    if (instance.homogeneous) return solve_arms_serial(instance, lambda, opts, warm);
    const auto n = static_cast<long>(instance.arms.size());
    std::vector<ArmSolution> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solve_one(instance, static_cast<std::size_t>(i), lambda, opts, warm);
    return out;
}

std::vector<ArmSolution> solve_arms(const CrbInstance& instance, const MultiplierVector& lambda,
                                    const ArmSolveOptions& opts, std::span<const ArmSolution> warm, Exec exec) {
    return exec == Exec::parallel ? solve_arms_omp(instance, lambda, opts, warm)
                                  : solve_arms_serial(instance, lambda, opts, warm);
}

std::vector<ActivationOccupancy> activation_occupancies(const CrbInstance& instance,
                                                        std::span<const ArmSolution> solutions, Exec exec) {
    const auto n = static_cast<long>(solutions.size());
    std::vector<ActivationOccupancy> out(static_cast<std::size_t>(n));
    if (instance.homogeneous && n > 0) {
        out[0] = occupancy_A(instance.arms[0], instance.chain, solutions[0].policy, instance.discount);
        std::fill(out.begin() + 1, out.end(), out[0]);
        return out;
    }
    auto one = [&](long i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = occupancy_A(instance.arms[k], instance.chain, solutions[k].policy, instance.discount);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < n; ++i) one(i);
    } else {
        for (long i = 0; i < n; ++i) one(i);
    }
    return out;
}

double relaxed_value(const CrbInstance& instance, const MultiplierVector& lambda,
                     std::span<const ArmSolution> solutions, const ContextOccupancy& B,
                     const InitialDistribution& initial) {
    const int S = instance.num_states();
    double total = 0.0;
    for (const auto& sol : solutions) total += initial.expect(sol.values.values, S);
    for (int g = 0; g < instance.num_contexts(); ++g)
        total += lambda[static_cast<std::size_t>(g)] * instance.chain.budgets[static_cast<std::size_t>(g)] *
                 initial.expect_context(B.target_row(g));
    return total;
}

DualSolveReport solve_dual(const CrbInstance& instance, const DualOptions& opts) {
    require_valid(instance);
    const int G = instance.num_contexts();
    const auto nG = static_cast<std::size_t>(G);

    DualSolveReport report;
    report.epsilon = opts.epsilon;
    report.B = occupancy_B(instance.chain, instance.discount);

    MultiplierVector lambda = MultiplierVector::zeros(G);
    if (!opts.initial_lambda.values.empty()) {
        if (opts.initial_lambda.size() != nG) throw std::invalid_argument("solve_dual: initial_lambda has the wrong size");
        for (std::size_t g = 0; g < nG; ++g) lambda[g] = std::max(0.0, opts.initial_lambda[g]);
    }
    std::vector<ArmSolution> solutions;
    std::vector<double> adaptive_step(nG, opts.step.delta0);
    std::vector<double> previous_slack;
    // Adaptive steps are expressed per unit of activation fraction: slack_g / (N E[B_g(g0)]).
    std::vector<double> occupancy_scale(nG);
    for (int g = 0; g < G; ++g)
        occupancy_scale[static_cast<std::size_t>(g)] =
            std::max(1e-300, instance.num_arms() * instance.initial.expect_context(report.B.target_row(g)));

    for (int k = 0; k < opts.max_iters; ++k) {
        solutions = solve_arms(instance, lambda, opts.arm,
                               opts.warm_start ? std::span<const ArmSolution>(solutions) : std::span<const ArmSolution>(),
                               opts.exec);
        const auto A = activation_occupancies(instance, solutions, opts.exec);

        DualIteration it;
        it.iteration = k;
        it.lambda = lambda;
        it.slack = constraint_slack(instance, A, report.B, instance.initial);
        it.dual_objective = relaxed_value(instance, lambda, solutions, report.B, instance.initial);

        if (opts.step.kind == StepSchedule::Kind::harmonic) {
            it.step.assign(nG, opts.step.harmonic_step(k));
        } else {
            for (std::size_t g = 0; g < previous_slack.size(); ++g) {
                const double sign = it.slack[g] * previous_slack[g];
                if (sign < 0.0)
                    adaptive_step[g] *= opts.step.shrink;
                else if (sign > 0.0 && !(lambda[g] == 0.0 && it.slack[g] < 0.0))
                    adaptive_step[g] *= opts.step.grow;
            }
            it.step.resize(nG);
            for (std::size_t g = 0; g < nG; ++g) it.step[g] = adaptive_step[g] / occupancy_scale[g];
        }

        MultiplierVector next = update_multipliers(lambda, it.slack, it.step);
        for (std::size_t g = 0; g < nG; ++g) it.delta_norm = std::max(it.delta_norm, std::abs(next[g] - lambda[g]));

        previous_slack = it.slack;
        const bool done = it.delta_norm <= opts.epsilon;
        const bool moved = it.delta_norm > 0.0;
        report.history.push_back(std::move(it));
        lambda = std::move(next);
        report.iterations = k + 1;
        if (done) {
            report.converged = true;
            if (!moved) break;
            solutions = solve_arms(instance, lambda, opts.arm, solutions, opts.exec);
            break;
        }
    }
    if (!report.converged)
        solutions = solve_arms(instance, lambda, opts.arm, solutions, opts.exec);

    report.lambda_star = lambda;
    report.per_arm = std::move(solutions);
    const auto A = activation_occupancies(instance, report.per_arm, opts.exec);
    report.final_slack = constraint_slack(instance, A, report.B, instance.initial);
    report.relaxed_value = relaxed_value(instance, lambda, report.per_arm, report.B, instance.initial);
    return report;
}

}  // namespace crb
