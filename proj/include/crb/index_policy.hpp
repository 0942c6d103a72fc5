#pragma once

// Index policy: each step, rank arms by I_i = Q_i(g, s_i, 1) - Q_i(g, s_i, 0)
// at the dual-optimal multipliers and activate the top C_g of them. Also the
// context-free restless-bandit baseline, which solves the same problem on
// models averaged over the stationary context distribution.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "crb/arm_solver.hpp"
#include "crb/dual_solver.hpp"
#include "crb/model.hpp"
#include "crb/policy.hpp"
#include "crb/rng.hpp"

namespace crb {

struct IndexVector {
    std::vector<double> values;
};

enum class SelectionMode {
    literal,      // always activate min(C_g, N) arms
    thresholded,  // at most C_g arms, only those with a positive index
};

enum class TieBreak { lowest_id, random };

std::string to_string(SelectionMode m);
SelectionMode selection_mode_from_string(const std::string& s);
std::string to_string(TieBreak t);
TieBreak tie_break_from_string(const std::string& s);

struct SelectionOptions {
    SelectionMode mode = SelectionMode::literal;
    TieBreak tie_break = TieBreak::lowest_id;
};

/// Throws std::out_of_range when g or a state is outside the Q-tables.
IndexVector compute_indices(std::span<const QTable> q_tables, ContextId g, std::span<const StateId> states);

/// Writes the chosen actions into `out`. `rng` is only used for random tie-breaking.
void select_arms(const IndexVector& indices, int budget, const SelectionOptions& opts, Rng* rng,
                 std::span<Action> out);
std::vector<Action> select_arms(const IndexVector& indices, int budget, const SelectionOptions& opts = {},
                                Rng* rng = nullptr);

class IndexPolicy final : public Policy {
public:
    /// `context_free`: every lookup uses context 0 of the tables (baseline
    /// mode), while budgets still follow the true context.
    IndexPolicy(std::vector<QTable> q_tables, std::vector<int> budgets, SelectionOptions opts,
                bool context_free = false, std::string label = "index");

    void decide(ContextId g, std::span<const StateId> states, Rng& rng, std::span<Action> out) const override;
    std::string name() const override { return label_; }

    const std::vector<QTable>& q_tables() const { return q_; }
    bool context_free() const { return context_free_; }

private:
    std::vector<QTable> q_;
    std::vector<int> budgets_;
    SelectionOptions opts_;
    bool context_free_;
    std::string label_;
};

/// Index policy from the per-arm Q-tables of a dual solve.
IndexPolicy make_index_policy(const CrbInstance& instance, const DualSolveReport& report,
                              const SelectionOptions& opts = {});

/// Context-free arm with P and R averaged under the stationary context distribution.
ArmModel restless_baseline_model(const ArmModel& arm, const ContextChain& chain);
ArmModel restless_baseline_model(const ArmModel& arm, std::span<const double> stationary);

/// Single-context instance built from the marginalized arms. The budget is
/// floor(sum_g h(g) C_g) and the initial state distribution is the
/// h-mixture of the per-context ones.
CrbInstance marginalize_instance(const CrbInstance& instance);

struct BaselineResult {
    CrbInstance marginal;
    DualSolveReport report;
    IndexPolicy policy;
};

/// Solves the marginalized instance and wraps its indices so the policy runs
/// on the contextual environment (ignoring g_t when ranking).
BaselineResult baseline_policy(const CrbInstance& instance, const DualOptions& dual = {},
                               const SelectionOptions& opts = {});

}  // namespace crb
