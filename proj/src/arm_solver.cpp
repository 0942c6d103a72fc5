#include "crb/arm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crb {

ValueTable ValueTable::zeros(int num_contexts, int num_states, MultiplierVector lambda) {
    ValueTable v;
    v.num_contexts = num_contexts;
    v.num_states = num_states;
    v.values.assign(static_cast<std::size_t>(num_contexts) * num_states, 0.0);
    v.lambda = std::move(lambda);
    return v;
}

ArmPolicy ArmPolicy::constant(int num_contexts, int num_states, Action a) {
    ArmPolicy p;
    p.num_contexts = num_contexts;
    p.num_states = num_states;
    p.actions.assign(static_cast<std::size_t>(num_contexts) * num_states, a);
    return p;
}

namespace {

void check_dims(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda) {
    if (arm.num_contexts() != chain.num_contexts || static_cast<int>(lambda.size()) != chain.num_contexts)
        throw std::invalid_argument("arm, chain and multiplier dimensions disagree");
}

// Q(g,s,·) for one (g,s), given the context-mixed continuation row u(s') = sum_g' G(g'|g) V(g',s').
inline void q_pair(const ArmModel& arm, const MultiplierVector& lambda, double beta, ContextId g, StateId s,
                   const double* u, double& q0, double& q1) {
    const int S = arm.num_states();
    double e0 = 0.0, e1 = 0.0;
    const auto r0 = arm.row(g, s, 0);
    const auto r1 = arm.row(g, s, 1);
    for (int sn = 0; sn < S; ++sn) {
        e0 += r0[static_cast<std::size_t>(sn)] * u[sn];
        e1 += r1[static_cast<std::size_t>(sn)] * u[sn];
    }
    q0 = arm.reward(g, s, 0) + beta * e0;
    q1 = arm.reward(g, s, 1) - lambda[static_cast<std::size_t>(g)] + beta * e1;
}

inline void continuation_row(const ContextChain& chain, int S, ContextId g, std::span<const double> v, double* u) {
    const int G = chain.num_contexts;
    std::fill(u, u + S, 0.0);
    for (int gn = 0; gn < G; ++gn) {
        const double w = chain.prob(g, gn);
        if (w == 0.0) continue;
        const double* vrow = v.data() + static_cast<std::size_t>(gn) * S;
        for (int sn = 0; sn < S; ++sn) u[sn] += w * vrow[sn];
    }
}

inline double sweep_context(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                            double beta, std::span<const double> in, std::span<double> out, ContextId g,
                            std::vector<double>& u) {
    const int S = arm.num_states();
    continuation_row(chain, S, g, in, u.data());
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
        double q0, q1;
        q_pair(arm, lambda, beta, g, s, u.data(), q0, q1);
        const std::size_t idx = static_cast<std::size_t>(g) * S + s;
        out[idx] = std::max(q0, q1);
        delta = std::max(delta, std::abs(out[idx] - in[idx]));
    }
    return delta;
}

}  // namespace

double bellman_sweep_serial(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                            double beta, std::span<const double> in, std::span<double> out) {
    std::vector<double> u(static_cast<std::size_t>(arm.num_states()));
    double delta = 0.0;
    for (int g = 0; g < chain.num_contexts; ++g)
        delta = std::max(delta, sweep_context(arm, chain, lambda, beta, in, out, g, u));
    return delta;
}

double bellman_sweep_omp(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                         double beta, std::span<const double> in, std::span<double> out) {
    const int G = chain.num_contexts;
    double delta = 0.0;
#pragma omp parallel reduction(max : delta)
    {
        std::vector<double> u(static_cast<std::size_t>(arm.num_states()));
#pragma omp for schedule(static)
        for (int g = 0; g < G; ++g) delta = std::max(delta, sweep_context(arm, chain, lambda, beta, in, out, g, u));
    }
    return delta;
}

ValueTable solve_arm_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                            double beta, const ArmSolveOptions& opts, const ValueTable* warm_start, Exec exec) {
    check_dims(arm, chain, lambda);
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_arm_values: tol must be positive");

    ValueTable current = ValueTable::zeros(chain.num_contexts, arm.num_states(), lambda);
    if (warm_start && warm_start->values.size() == current.values.size()) current.values = warm_start->values;
    std::vector<double> next(current.values.size());

    const double stop = opts.tol * (1.0 - beta) / (2.0 * beta);
    double delta = 0.0;
    for (long it = 1; it <= opts.max_iters; ++it) {
        delta = exec == Exec::parallel ? bellman_sweep_omp(arm, chain, lambda, beta, current.values, next)
                                       : bellman_sweep_serial(arm, chain, lambda, beta, current.values, next);
        current.values.swap(next);
        if (delta <= stop) {
            current.iterations = static_cast<int>(it);
            return current;
        }
    }
    throw ConvergenceError("value iteration hit its iteration cap; last sweep change " + std::to_string(delta),
                           beta * delta);
}

QTable q_from_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda, double beta,
                     const ValueTable& values) {
    check_dims(arm, chain, lambda);
    const int G = chain.num_contexts, S = arm.num_states();
    if (values.num_contexts != G || values.num_states != S)
        throw std::invalid_argument("q_from_values: value table dimensions disagree with the arm");

    QTable q;
    q.num_contexts = G;
    q.num_states = S;
    q.values.assign(static_cast<std::size_t>(G) * S * kNumActions, 0.0);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < kNumActions; ++a) {
                const auto act = static_cast<Action>(a);
                double cont = 0.0;
                for (int gn = 0; gn < G; ++gn)
                    for (int sn = 0; sn < S; ++sn) cont += chain.prob(g, gn) * arm.prob(g, s, act, sn) * values(gn, sn);
                q(g, s, act) = arm.reward(g, s, act) - lambda[static_cast<std::size_t>(g)] * a + beta * cont;
            }
    return q;
}

ArmPolicy greedy_policy(const QTable& q) {
    ArmPolicy p = ArmPolicy::constant(q.num_contexts, q.num_states, 0);
    for (int g = 0; g < q.num_contexts; ++g)
        for (int s = 0; s < q.num_states; ++s) p(g, s) = q(g, s, 1) > q(g, s, 0) ? 1 : 0;
    return p;
}

double bellman_residual(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda, double beta,
                        const ValueTable& values) {
    std::vector<double> out(values.values.size());
    return bellman_sweep_serial(arm, chain, lambda, beta, values.values, out);
}

ValueTable finite_horizon_values(const ArmModel& arm, const ContextChain& chain, const MultiplierVector& lambda,
                                 double beta, int horizon) {
    check_dims(arm, chain, lambda);
    ValueTable v = ValueTable::zeros(chain.num_contexts, arm.num_states(), lambda);
    std::vector<double> next(v.values.size());
    for (int h = 0; h < horizon; ++h) {
        bellman_sweep_serial(arm, chain, lambda, beta, v.values, next);
        v.values.swap(next);
    }
    v.iterations = horizon;
    return v;
}

}  // namespace crb
