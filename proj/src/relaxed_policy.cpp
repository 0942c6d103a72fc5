#include "crb/relaxed_policy.hpp"

#include <stdexcept>

#include "crb/lp.hpp"

namespace crb {

RandomizedArmPolicy RandomizedArmPolicy::from(const ArmPolicy& p) {
    RandomizedArmPolicy out;
    out.num_contexts = p.num_contexts;
    out.num_states = p.num_states;
    out.activation.assign(p.actions.begin(), p.actions.end());
    return out;
}

StationaryRelaxedSolution stationary_relaxed_policy(const CrbInstance& instance, const ArmPolicy& fallback) {
    require_valid(instance);
    if (!instance.homogeneous) throw std::invalid_argument("stationary_relaxed_policy: instance must be homogeneous");
    const auto& arm = instance.arms.front();
    const int G = instance.num_contexts(), S = instance.num_states(), N = instance.num_arms();
    const int n = G * S * kNumActions;
    auto var = [S](int g, int s, int a) { return static_cast<std::size_t>((g * S + s) * kNumActions + a); };

    LinearProgram lp(n);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < kNumActions; ++a) lp.objective[var(g, s, a)] = arm.reward(g, s, static_cast<Action>(a));

    // One balance row is implied by the others and the normalization; dropping
    // it keeps the constraint matrix full rank.
    for (int g2 = 0; g2 < G; ++g2)
        for (int s2 = 0; s2 < S; ++s2) {
            if (g2 == G - 1 && s2 == S - 1) continue;
            std::vector<double> row(static_cast<std::size_t>(n), 0.0);
            for (int a = 0; a < kNumActions; ++a) row[var(g2, s2, a)] += 1.0;
            for (int g = 0; g < G; ++g) {
                const double pg = instance.chain.prob(g, g2);
                if (pg == 0.0) continue;
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < kNumActions; ++a)
                        row[var(g, s, a)] -= pg * arm.prob(g, s, static_cast<Action>(a), s2);
            }
            lp.add_eq(std::move(row), 0.0);
        }
    lp.add_eq(std::vector<double>(static_cast<std::size_t>(n), 1.0), 1.0);
    for (int g = 0; g < G; ++g) {
        const double alpha = static_cast<double>(instance.chain.budgets[static_cast<std::size_t>(g)]) / N;
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        for (int s = 0; s < S; ++s) {
            row[var(g, s, 1)] = 1.0 - alpha;
            row[var(g, s, 0)] = -alpha;
        }
        lp.add_le(std::move(row), 0.0);
    }

    const auto res = solve_lp(lp);
    if (res.status != LpStatus::optimal)
        throw std::runtime_error("stationary_relaxed_policy: LP solve ended " + to_string(res.status));

    StationaryRelaxedSolution out;
    out.occupancy = res.x;
    out.reward_rate = res.objective;
    out.policy.num_contexts = G;
    out.policy.num_states = S;
    out.policy.activation.assign(static_cast<std::size_t>(G) * S, 0.0);
    out.steady_state.assign(static_cast<std::size_t>(G) * S, 0.0);
    out.activation_fraction.assign(static_cast<std::size_t>(G), 0.0);
    for (int g = 0; g < G; ++g) {
        double h = 0.0, active = 0.0;
        for (int s = 0; s < S; ++s) {
            const double m0 = res.x[var(g, s, 0)], m1 = res.x[var(g, s, 1)];
            h += m0 + m1;
            active += m1;
            const auto k = static_cast<std::size_t>(g) * S + s;
            out.policy.activation[k] = m0 + m1 > 1e-12 ? m1 / (m0 + m1) : fallback(g, s);
        }
        for (int s = 0; s < S; ++s) {
            const auto k = static_cast<std::size_t>(g) * S + s;
            out.steady_state[k] = h > 0.0 ? (res.x[var(g, s, 0)] + res.x[var(g, s, 1)]) / h : 0.0;
        }
        out.activation_fraction[static_cast<std::size_t>(g)] = h > 0.0 ? active / h : 0.0;
    }
    return out;
}

}  // namespace crb
