#pragma once

// Problem description for contextual restless bandits: an exogenous context
// chain shared by all arms, per-arm context-augmented MDPs with binary actions,
// per-context activation budgets, a discount factor and an initial condition.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crb {

using ContextId = int;
using StateId = int;
using Action = std::uint8_t;

inline constexpr int kNumActions = 2;

/// Absolute tolerance on probability row sums.
inline constexpr double kRowTolerance = 1e-12;

/// Raised when an iterative routine hits its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Markov chain over global contexts, plus the activation budget per context.
struct ContextChain {
    int num_contexts = 0;
    std::vector<double> transition;  // row-major, (g, g') = G(g'|g)
    std::vector<int> budgets;

    double prob(ContextId from, ContextId to) const {
        return transition[static_cast<std::size_t>(from) * num_contexts + to];
    }
    std::span<const double> row(ContextId from) const {
        return {transition.data() + static_cast<std::size_t>(from) * num_contexts,
                static_cast<std::size_t>(num_contexts)};
    }

    static ContextChain uniform(int num_contexts, std::vector<int> budgets);
};

/// One arm: transition P(s'|g,s,a) and reward R(g,s,a), stored flat.
class ArmModel {
public:
    ArmModel() = default;
    ArmModel(int num_contexts, int num_states);

    int num_contexts() const { return num_contexts_; }
    int num_states() const { return num_states_; }

    double prob(ContextId g, StateId s, Action a, StateId next) const {
        return transition_[row_offset(g, s, a) + next];
    }
    double& prob(ContextId g, StateId s, Action a, StateId next) {
        return transition_[row_offset(g, s, a) + next];
    }
    std::span<const double> row(ContextId g, StateId s, Action a) const {
        return {transition_.data() + row_offset(g, s, a), static_cast<std::size_t>(num_states_)};
    }
    std::span<double> row(ContextId g, StateId s, Action a) {
        return {transition_.data() + row_offset(g, s, a), static_cast<std::size_t>(num_states_)};
    }

    double reward(ContextId g, StateId s, Action a) const { return reward_[reward_index(g, s, a)]; }
    double& reward(ContextId g, StateId s, Action a) { return reward_[reward_index(g, s, a)]; }

    const std::vector<double>& transitions() const { return transition_; }
    const std::vector<double>& rewards() const { return reward_; }

    /// Largest |R(g,s,a)|.
    double max_abs_reward() const;

    /// Divides every row by its sum. Only used at build time.
    void normalize_rows();

    bool operator==(const ArmModel&) const = default;

private:
    std::size_t reward_index(ContextId g, StateId s, Action a) const {
        return (static_cast<std::size_t>(g) * num_states_ + s) * kNumActions + a;
    }
    std::size_t row_offset(ContextId g, StateId s, Action a) const {
        return reward_index(g, s, a) * num_states_;
    }

    int num_contexts_ = 0;
    int num_states_ = 0;
    std::vector<double> transition_;
    std::vector<double> reward_;
};

/// Product-form initial condition: g0 ~ context, then each s_{i,0} ~ state[g0] i.i.d.
struct InitialDistribution {
    std::vector<double> context;             // length |G|
    std::vector<std::vector<double>> state;  // |G| rows of length |S|

    static InitialDistribution uniform(int num_contexts, int num_states);
    static InitialDistribution point(int num_contexts, int num_states, ContextId g0, StateId s0);

    /// Weighted average of a (g,s) table under the initial condition.
    double expect(std::span<const double> table_gs, int num_states) const;
    /// Weighted average of a per-context vector under the context marginal.
    double expect_context(std::span<const double> per_context) const;
};

struct CrbInstance {
    ContextChain chain;
    std::vector<ArmModel> arms;
    double discount = 0.9;
    InitialDistribution initial;
    bool homogeneous = false;

    int num_arms() const { return static_cast<int>(arms.size()); }
    int num_contexts() const { return chain.num_contexts; }
    int num_states() const { return arms.empty() ? 0 : arms.front().num_states(); }
    double max_abs_reward() const;
};

/// Lagrange multipliers, one per context.
struct MultiplierVector {
    std::vector<double> values;

    MultiplierVector() = default;
    explicit MultiplierVector(std::vector<double> v) : values(std::move(v)) {}
    static MultiplierVector zeros(int num_contexts) {
        return MultiplierVector(std::vector<double>(static_cast<std::size_t>(num_contexts), 0.0));
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t g) const { return values[g]; }
    double& operator[](std::size_t g) { return values[g]; }
    bool operator==(const MultiplierVector&) const = default;
};

struct Violation {
    std::string path;
    std::string message;
};

/// Every invariant violation of the instance; empty means valid.
std::vector<Violation> validate_instance(const CrbInstance& instance);

/// Throws std::invalid_argument listing the violations, if any.
void require_valid(const CrbInstance& instance);

/// Stationary distribution h of the context chain (h G = h, sum h = 1).
///
/// Power iteration runs on the lazy kernel (I + G)/2, which shares the
/// stationary distribution of G and is aperiodic, so deterministic cycles
/// converge to the uniform cycle distribution. Throws ConvergenceError when
/// the residual does not drop below `tol` within `max_iters` sweeps.
std::vector<double> stationary_context_distribution(const ContextChain& chain, double tol = 1e-12,
                                                    int max_iters = 1'000'000);

/// floor(alpha * n) with a small guard against representation error.
int budget_from_ratio(double alpha, int num_arms);

}  // namespace crb
