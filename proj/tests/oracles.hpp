#pragma once

// Reference computations used by the tests. Each one solves the same quantity
// as the library by a different method (plain loops, an LP, Eigen solves,
// truncated series), so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "crb/lp.hpp"
#include "crb/model.hpp"

namespace oracle {

using crb::Action;
using crb::ArmModel;
using crb::ContextChain;

inline double q_backup(const ArmModel& arm, const ContextChain& chain, const std::vector<double>& lambda, double beta,
                       const std::vector<double>& V, int g, int s, int a) {
    const int G = chain.num_contexts, S = arm.num_states();
    double cont = 0.0;
    for (int g2 = 0; g2 < G; ++g2)
        for (int s2 = 0; s2 < S; ++s2)
            cont += chain.prob(g, g2) * arm.prob(g, s, static_cast<Action>(a), s2) * V[g2 * S + s2];
    return arm.reward(g, s, static_cast<Action>(a)) - lambda[g] * a + beta * cont;
}

/// `steps` synchronous Bellman backups from zero.
inline std::vector<double> value_iteration(const ArmModel& arm, const ContextChain& chain,
                                           const std::vector<double>& lambda, double beta, int steps) {
    const int G = chain.num_contexts, S = arm.num_states();
    std::vector<double> V(G * S, 0.0), next(G * S);
    for (int k = 0; k < steps; ++k) {
        for (int g = 0; g < G; ++g)
            for (int s = 0; s < S; ++s)
                next[g * S + s] = std::max(q_backup(arm, chain, lambda, beta, V, g, s, 0),
                                           q_backup(arm, chain, lambda, beta, V, g, s, 1));
        V.swap(next);
    }
    return V;
}

/// Optimal values from the LP  min sum V  s.t.  V(g,s) >= R - lambda a + beta E[V(g',s')]  for all a.
/// V is free, so it is split as V+ - V-.
inline std::vector<double> lp_values(const ArmModel& arm, const ContextChain& chain, const std::vector<double>& lambda,
                                     double beta, bool* ok = nullptr) {
    const int G = chain.num_contexts, S = arm.num_states(), n = G * S;
    crb::LinearProgram lp(2 * n);
    for (int k = 0; k < n; ++k) {
        lp.objective[k] = -1.0;
        lp.objective[n + k] = 1.0;
    }
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) {
                // -V(g,s) + beta sum G P V <= -(R - lambda a)
                std::vector<double> row(2 * n, 0.0);
                for (int g2 = 0; g2 < G; ++g2)
                    for (int s2 = 0; s2 < S; ++s2) {
                        const double c = beta * chain.prob(g, g2) * arm.prob(g, s, static_cast<Action>(a), s2);
                        row[g2 * S + s2] += c;
                        row[n + g2 * S + s2] -= c;
                    }
                row[g * S + s] -= 1.0;
                row[n + g * S + s] += 1.0;
                lp.add_le(row, -(arm.reward(g, s, static_cast<Action>(a)) - lambda[g] * a));
            }
    const auto res = crb::solve_lp(lp);
    if (ok) *ok = res.status == crb::LpStatus::optimal;
    std::vector<double> V(n);
    for (int k = 0; k < n; ++k) V[k] = res.x.empty() ? 0.0 : res.x[k] - res.x[n + k];
    return V;
}

/// Stationary distribution of a row-stochastic matrix by solving (P' - I) pi = 0 with sum(pi) = 1.
inline std::vector<double> stationary(const Eigen::MatrixXd& P) {
    const int n = static_cast<int>(P.rows());
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd pi = A.fullPivLu().solve(b);
    return std::vector<double>(pi.data(), pi.data() + n);
}

inline Eigen::MatrixXd chain_matrix(const ContextChain& chain) {
    const int G = chain.num_contexts;
    Eigen::MatrixXd P(G, G);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) P(i, j) = chain.prob(i, j);
    return P;
}

/// B_g(g0) = sum_t beta^t P(g_t = g | g0), truncated after `steps` terms.
inline std::vector<double> occupancy_B_series(const ContextChain& chain, double beta, int steps) {
    const int G = chain.num_contexts;
    std::vector<double> B(G * G, 0.0);
    for (int g0 = 0; g0 < G; ++g0) {
        std::vector<double> p(G, 0.0), q(G);
        p[g0] = 1.0;
        double w = 1.0;
        for (int t = 0; t < steps; ++t, w *= beta) {
            for (int g = 0; g < G; ++g) B[g * G + g0] += w * p[g];
            std::fill(q.begin(), q.end(), 0.0);
            for (int i = 0; i < G; ++i)
                for (int j = 0; j < G; ++j) q[j] += p[i] * chain.prob(i, j);
            p.swap(q);
        }
    }
    return B;
}

/// A_g(g0, s0) by propagating the joint (g, s) distribution under a deterministic policy.
inline std::vector<double> occupancy_A_series(const ArmModel& arm, const ContextChain& chain,
                                              const std::vector<int>& policy, double beta, int steps) {
    const int G = chain.num_contexts, S = arm.num_states(), n = G * S;
    std::vector<double> A(G * n, 0.0);
    for (int x0 = 0; x0 < n; ++x0) {
        std::vector<double> p(n, 0.0), q(n);
        p[x0] = 1.0;
        double w = 1.0;
        for (int t = 0; t < steps; ++t, w *= beta) {
            for (int g = 0; g < G; ++g)
                for (int s = 0; s < S; ++s)
                    if (policy[g * S + s]) A[g * n + x0] += w * p[g * S + s];
            std::fill(q.begin(), q.end(), 0.0);
            for (int g = 0; g < G; ++g)
                for (int s = 0; s < S; ++s) {
                    const double m = p[g * S + s];
                    if (m == 0.0) continue;
                    const auto a = static_cast<Action>(policy[g * S + s]);
                    for (int g2 = 0; g2 < G; ++g2)
                        for (int s2 = 0; s2 < S; ++s2) q[g2 * S + s2] += m * chain.prob(g, g2) * arm.prob(g, s, a, s2);
                }
            p.swap(q);
        }
    }
    return A;
}

inline double tv(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) d += std::abs(p[k] - q[k]);
    return 0.5 * d;
}

}  // namespace oracle
