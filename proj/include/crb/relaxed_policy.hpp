#pragma once

// The single-arm relaxed policy used for steady-state checks on homogeneous
// instances. A deterministic greedy policy at a subgradient lambda* sits on
// one side of the dual kink and is generally not budget-feasible from its own
// steady state; the relaxed optimum randomizes there. It is computed from the
// stationary occupancy LP
//   max  sum mu(g,s,a) R(g,s,a)
//   s.t. sum_a mu(g',s',a) = sum_{g,s,a} mu(g,s,a) G(g'|g) P(s'|g,s,a),  sum mu = 1,
//        sum_s mu(g,s,1) <= (C_g / N) sum_{s,a} mu(g,s,a),   mu >= 0.

#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/model.hpp"

namespace crb {

/// P(a = 1 | g, s), row-major (g, s).
struct RandomizedArmPolicy {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<double> activation;

    double operator()(ContextId g, StateId s) const {
        return activation[static_cast<std::size_t>(g) * num_states + s];
    }

    static RandomizedArmPolicy from(const ArmPolicy& p);
};

struct StationaryRelaxedSolution {
    RandomizedArmPolicy policy;
    std::vector<double> occupancy;  // mu(g, s, a)
    std::vector<double> steady_state;  // m*_g(s), row-major (g, s)
    std::vector<double> activation_fraction;  // per context: sum_s mu(g,s,1) / h(g)
    double reward_rate = 0.0;  // per arm per step
};

/// Solves the LP above for arm 0 of a homogeneous instance. States with no
/// stationary mass take the action of `fallback`. Throws std::runtime_error
/// if the LP solver does not reach an optimum.
StationaryRelaxedSolution stationary_relaxed_policy(const CrbInstance& instance, const ArmPolicy& fallback);

}  // namespace crb
