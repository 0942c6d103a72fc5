#pragma once

// Discounted occupancies used as exact subgradients of the dual:
//   B_g(g^)     = E[ sum_t beta^t 1{g_t = g} | g_0 = g^ ]
//   A_g(g^, s^) = E[ sum_t beta^t 1{g_t = g} a_t | g_0 = g^, s_0 = s^ ]   under a fixed arm policy.
// Both are solved directly from their one-step recursions with a dense LU.

#include <span>
#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/model.hpp"

namespace crb {

struct ContextOccupancy {
    int num_contexts = 0;
    std::vector<double> values;  // (target g, start g^)

    double operator()(ContextId target, ContextId start) const {
        return values[static_cast<std::size_t>(target) * num_contexts + start];
    }
    std::span<const double> target_row(ContextId target) const {
        return {values.data() + static_cast<std::size_t>(target) * num_contexts,
                static_cast<std::size_t>(num_contexts)};
    }
};

struct ActivationOccupancy {
    int num_contexts = 0;
    int num_states = 0;
    std::vector<double> values;  // (target g, start g^, start s^)

    double operator()(ContextId target, ContextId g0, StateId s0) const {
        return values[(static_cast<std::size_t>(target) * num_contexts + g0) * num_states + s0];
    }
    /// The (g^, s^) table for one target context.
    std::span<const double> target_table(ContextId target) const {
        const auto n = static_cast<std::size_t>(num_contexts) * num_states;
        return {values.data() + static_cast<std::size_t>(target) * n, n};
    }
};

struct OccupancyTables {
    ContextOccupancy B;
    std::vector<ActivationOccupancy> A;  // one per arm
};

ContextOccupancy occupancy_B(const ContextChain& chain, double beta);

ActivationOccupancy occupancy_A(const ArmModel& arm, const ContextChain& chain, const ArmPolicy& policy, double beta);

/// Per-context expected discounted activations minus budget,
///   sum_i E[A_{i,g}(g0, s0)] - C_g E[B_g(g0)],
/// with the expectation taken under `initial`.
std::vector<double> constraint_slack(const CrbInstance& instance, std::span<const ActivationOccupancy> A,
                                     const ContextOccupancy& B, const InitialDistribution& initial);

/// Largest |residual| of the B recursion.
double occupancy_B_residual(const ContextChain& chain, double beta, const ContextOccupancy& B);
/// Largest |residual| of the A recursion.
double occupancy_A_residual(const ArmModel& arm, const ContextChain& chain, const ArmPolicy& policy, double beta,
                            const ActivationOccupancy& A);

}  // namespace crb
