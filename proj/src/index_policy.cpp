#include "crb/index_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crb {

std::string to_string(SelectionMode m) { return m == SelectionMode::literal ? "literal" : "thresholded"; }

SelectionMode selection_mode_from_string(const std::string& s) {
    if (s == "literal") return SelectionMode::literal;
    if (s == "thresholded") return SelectionMode::thresholded;
    throw std::invalid_argument("unknown selection mode '" + s + "' (expected literal or thresholded)");
}

std::string to_string(TieBreak t) { return t == TieBreak::lowest_id ? "lowest_id" : "random"; }

TieBreak tie_break_from_string(const std::string& s) {
    if (s == "lowest_id") return TieBreak::lowest_id;
    if (s == "random") return TieBreak::random;
    throw std::invalid_argument("unknown tie break '" + s + "' (expected lowest_id or random)");
}

IndexVector compute_indices(std::span<const QTable> q_tables, ContextId g, std::span<const StateId> states) {
    if (q_tables.size() != states.size())
        throw std::out_of_range("compute_indices: " + std::to_string(q_tables.size()) + " Q-tables for " +
                                std::to_string(states.size()) + " arm states");
    IndexVector out;
    out.values.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& q = q_tables[i];
        if (g < 0 || g >= q.num_contexts) throw std::out_of_range("compute_indices: context " + std::to_string(g));
        if (states[i] < 0 || states[i] >= q.num_states)
            throw std::out_of_range("compute_indices: arm " + std::to_string(i) + " state " + std::to_string(states[i]));
        out.values[i] = q(g, states[i], 1) - q(g, states[i], 0);
    }
    return out;
}

void select_arms(const IndexVector& indices, int budget, const SelectionOptions& opts, Rng* rng,
                 std::span<Action> out) {
    const auto n = indices.values.size();
    std::fill(out.begin(), out.end(), Action{0});
    const auto k = static_cast<std::size_t>(std::clamp<long>(budget, 0, static_cast<long>(n)));
    if (k == 0) return;

    // rank[i] breaks ties; identity for lowest-id, a uniform permutation otherwise.
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    if (opts.tie_break == TieBreak::random) {
        if (rng == nullptr) throw std::invalid_argument("select_arms: random tie-breaking needs an Rng");
        for (std::size_t i = n; i > 1; --i) std::swap(rank[i - 1], rank[rng->below(i)]);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& I = indices.values;
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return I[a] != I[b] ? I[a] > I[b] : rank[a] < rank[b]; });
    for (std::size_t j = 0; j < k; ++j) {
        const auto i = order[j];
        if (opts.mode == SelectionMode::thresholded && !(I[i] > 0.0)) break;
        out[i] = 1;
    }
}

std::vector<Action> select_arms(const IndexVector& indices, int budget, const SelectionOptions& opts, Rng* rng) {
    std::vector<Action> out(indices.values.size());
    select_arms(indices, budget, opts, rng, out);
    return out;
}

IndexPolicy::IndexPolicy(std::vector<QTable> q_tables, std::vector<int> budgets, SelectionOptions opts,
                         bool context_free, std::string label)
    : q_(std::move(q_tables)), budgets_(std::move(budgets)), opts_(opts), context_free_(context_free),
      label_(std::move(label)) {}

void IndexPolicy::decide(ContextId g, std::span<const StateId> states, Rng& rng, std::span<Action> out) const {
    const auto idx = compute_indices(q_, context_free_ ? 0 : g, states);
    select_arms(idx, budgets_.at(static_cast<std::size_t>(g)), opts_, &rng, out);
}

IndexPolicy make_index_policy(const CrbInstance& instance, const DualSolveReport& report,
                              const SelectionOptions& opts) {
    std::vector<QTable> q;
    q.reserve(report.per_arm.size());
    for (const auto& sol : report.per_arm) q.push_back(sol.q);
    return IndexPolicy(std::move(q), instance.chain.budgets, opts, false, "crb-index");
}

ArmModel restless_baseline_model(const ArmModel& arm, std::span<const double> h) {
    const int G = arm.num_contexts(), S = arm.num_states();
    if (static_cast<int>(h.size()) != G)
        throw std::invalid_argument("restless_baseline_model: weight vector does not match the arm's contexts");
    ArmModel out(1, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < kNumActions; ++a) {
            const auto act = static_cast<Action>(a);
            double r = 0.0;
            auto row = out.row(0, s, act);
            for (int g = 0; g < G; ++g) {
                const double w = h[static_cast<std::size_t>(g)];
                r += w * arm.reward(g, s, act);
                const auto src = arm.row(g, s, act);
                for (int s2 = 0; s2 < S; ++s2) row[static_cast<std::size_t>(s2)] += w * src[static_cast<std::size_t>(s2)];
            }
            out.reward(0, s, act) = r;
        }
    out.normalize_rows();
    return out;
}

ArmModel restless_baseline_model(const ArmModel& arm, const ContextChain& chain) {
    return restless_baseline_model(arm, stationary_context_distribution(chain));
}

CrbInstance marginalize_instance(const CrbInstance& instance) {
    require_valid(instance);
    const auto h = stationary_context_distribution(instance.chain);
    const int G = instance.num_contexts(), S = instance.num_states();

    double budget = 0.0;
    for (int g = 0; g < G; ++g) budget += h[static_cast<std::size_t>(g)] * instance.chain.budgets[static_cast<std::size_t>(g)];

    CrbInstance out;
    out.chain = ContextChain::uniform(1, {static_cast<int>(std::floor(budget + 1e-9))});
    out.discount = instance.discount;
    out.homogeneous = instance.homogeneous;
    out.initial.context = {1.0};
    out.initial.state.assign(1, std::vector<double>(static_cast<std::size_t>(S), 0.0));
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            out.initial.state[0][static_cast<std::size_t>(s)] +=
                h[static_cast<std::size_t>(g)] * instance.initial.state[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)];
    out.arms.reserve(instance.arms.size());
    for (const auto& arm : instance.arms) out.arms.push_back(restless_baseline_model(arm, h));
    return out;
}

BaselineResult baseline_policy(const CrbInstance& instance, const DualOptions& dual, const SelectionOptions& opts) {
    CrbInstance marginal = marginalize_instance(instance);
    DualSolveReport report = solve_dual(marginal, dual);
    std::vector<QTable> q;
    q.reserve(report.per_arm.size());
    for (const auto& sol : report.per_arm) q.push_back(sol.q);
    IndexPolicy policy(std::move(q), instance.chain.budgets, opts, true, "restless-baseline");
    return {std::move(marginal), std::move(report), std::move(policy)};
}

}  // namespace crb
