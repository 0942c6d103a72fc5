#include "crb/occupancy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crb {

ContextOccupancy occupancy_B(const ContextChain& chain, double beta) {
    const int G = chain.num_contexts;
    if (G <= 0 || chain.transition.size() != static_cast<std::size_t>(G) * G)
        throw std::invalid_argument("occupancy_B: malformed context chain");

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(G, G);
    for (int from = 0; from < G; ++from)
        for (int to = 0; to < G; ++to) m(from, to) -= beta * chain.prob(from, to);
    // Column g of the inverse holds B_g(.) over start contexts.
    const Eigen::MatrixXd inv = m.partialPivLu().solve(Eigen::MatrixXd::Identity(G, G));

    ContextOccupancy B;
    B.num_contexts = G;
    B.values.resize(static_cast<std::size_t>(G) * G);
    for (int target = 0; target < G; ++target)
        for (int start = 0; start < G; ++start)
            B.values[static_cast<std::size_t>(target) * G + start] = inv(start, target);
    return B;
}

ActivationOccupancy occupancy_A(const ArmModel& arm, const ContextChain& chain, const ArmPolicy& policy, double beta) {
    const int G = chain.num_contexts, S = arm.num_states();
    if (arm.num_contexts() != G || policy.num_contexts != G || policy.num_states != S)
        throw std::invalid_argument("occupancy_A: policy, arm and chain dimensions disagree");
    const int n = G * S;

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, G);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s) {
            const int row = g * S + s;
            const Action a = policy(g, s);
            rhs(row, g) = a;
            for (int gn = 0; gn < G; ++gn) {
                const double w = beta * chain.prob(g, gn);
                if (w == 0.0) continue;
                for (int sn = 0; sn < S; ++sn) m(row, gn * S + sn) -= w * arm.prob(g, s, a, sn);
            }
        }
    const Eigen::MatrixXd x = m.partialPivLu().solve(rhs);

    ActivationOccupancy A;
    A.num_contexts = G;
    A.num_states = S;
    A.values.resize(static_cast<std::size_t>(G) * n);
    for (int target = 0; target < G; ++target)
        for (int row = 0; row < n; ++row) A.values[static_cast<std::size_t>(target) * n + row] = x(row, target);
    return A;
}

std::vector<double> constraint_slack(const CrbInstance& instance, std::span<const ActivationOccupancy> A,
                                     const ContextOccupancy& B, const InitialDistribution& initial) {
    const int G = instance.num_contexts(), S = instance.num_states();
    std::vector<double> slack(static_cast<std::size_t>(G), 0.0);
    for (int g = 0; g < G; ++g) {
        double activations = 0.0;
        for (const auto& arm_occ : A) activations += initial.expect(arm_occ.target_table(g), S);
        slack[static_cast<std::size_t>(g)] =
            activations - instance.chain.budgets[static_cast<std::size_t>(g)] * initial.expect_context(B.target_row(g));
    }
    return slack;
}

double occupancy_B_residual(const ContextChain& chain, double beta, const ContextOccupancy& B) {
    const int G = chain.num_contexts;
    double r = 0.0;
    for (int target = 0; target < G; ++target)
        for (int start = 0; start < G; ++start) {
            double rhs = start == target ? 1.0 : 0.0;
            for (int gn = 0; gn < G; ++gn) rhs += beta * chain.prob(start, gn) * B(target, gn);
            r = std::max(r, std::abs(B(target, start) - rhs));
        }
    return r;
}

double occupancy_A_residual(const ArmModel& arm, const ContextChain& chain, const ArmPolicy& policy, double beta,
                            const ActivationOccupancy& A) {
    const int G = chain.num_contexts, S = arm.num_states();
    double r = 0.0;
    for (int target = 0; target < G; ++target)
        for (int g = 0; g < G; ++g)
            for (int s = 0; s < S; ++s) {
                const Action a = policy(g, s);
                double rhs = g == target ? a : 0.0;
                for (int gn = 0; gn < G; ++gn)
                    for (int sn = 0; sn < S; ++sn)
                        rhs += beta * chain.prob(g, gn) * arm.prob(g, s, a, sn) * A(target, gn, sn);
                r = std::max(r, std::abs(A(target, g, s) - rhs));
            }
    return r;
}

}  // namespace crb
