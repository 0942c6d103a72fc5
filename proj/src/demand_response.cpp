#include "crb/demand_response.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "crb/rng.hpp"

namespace crb::dr {

namespace {
bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace

std::vector<std::string> validate_config(const DrConfig& cfg) {
    std::vector<std::string> out;
    if (cfg.num_users < 1) out.emplace_back("num_users must be at least 1");
    if (cfg.num_contexts < 1) out.emplace_back("num_contexts must be at least 1");
    if (cfg.fatigue_levels < 1) out.emplace_back("fatigue_levels must be at least 1");
    if (!cfg.selection_ratio.empty() && static_cast<int>(cfg.selection_ratio.size()) != cfg.num_contexts)
        out.emplace_back("selection_ratio needs one entry per context");
    for (int g = 0; g < cfg.num_contexts && (cfg.selection_ratio.empty() || g < static_cast<int>(cfg.selection_ratio.size())); ++g)
        if (!(cfg.ratio(g) > 0.0 && cfg.ratio(g) <= 1.0))
            out.push_back("selection_ratio[" + std::to_string(g) + "] must lie in (0,1]");
    if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) out.emplace_back("discount must lie in (0,1)");
    if (!(cfg.load_low <= cfg.load_high)) out.emplace_back("load_low must not exceed load_high");
    const auto& f = cfg.fatigue;
    if (!in_unit(f.p_up) || !in_unit(f.p_down)) out.emplace_back("p_up and p_down must be probabilities");
    if (!in_unit(f.sigma_min) || !in_unit(f.sigma_max) || f.sigma_min > f.sigma_max)
        out.emplace_back("responsiveness clamp bounds must satisfy 0 <= min <= max <= 1");
    return out;
}

double dr_reward(int context_label, DrState state, Action a, double load) {
    if (a == 0 || state.z == 0) return 0.0;
    const double d = context_label - state.x;
    return load / (d * d + 1.0);
}

double responsiveness(const FatigueParams& p, int context_label, int next_fatigue, int num_contexts) {
    const double mid = (num_contexts + 1) / 2.0;
    const double raw = p.s0 - p.s1 * (next_fatigue - 1) + p.s2 * (context_label - mid);
    return std::clamp(raw, p.sigma_min, p.sigma_max);
}

std::vector<double> dr_transition(int context_label, DrState state, Action a, const FatigueParams& params,
                                  int fatigue_levels, int num_contexts) {
    // Fatigue moves to `moved` w.p. p_move, otherwise stays.
    int moved = state.x;
    double p_move = 0.0;
    if (a == 1 && state.z == 1) {
        moved = std::min(state.x + 1, fatigue_levels);
        p_move = params.p_up;
    } else if (a == 0) {
        moved = std::max(state.x - 1, 1);
        p_move = params.p_down;
    }

    std::vector<double> dist(static_cast<std::size_t>(2 * fatigue_levels), 0.0);
    auto add = [&](int x_next, double weight) {
        if (weight == 0.0) return;
        const double on = responsiveness(params, context_label, x_next, num_contexts);
        dist[static_cast<std::size_t>(encode({1, x_next}))] += weight * on;
        dist[static_cast<std::size_t>(encode({0, x_next}))] += weight * (1.0 - on);
    };
    if (moved == state.x) {
        add(state.x, 1.0);
    } else {
        add(moved, p_move);
        add(state.x, 1.0 - p_move);
    }
    return dist;
}

std::vector<double> sample_loads(const DrConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, 0x10AD));
    std::vector<double> loads(static_cast<std::size_t>(cfg.num_users));
    for (auto& l : loads) l = cfg.load_low + (cfg.load_high - cfg.load_low) * rng.uniform();
    return loads;
}

CrbInstance build_dr_instance(const DrConfig& cfg) {
    if (auto problems = validate_config(cfg); !problems.empty()) {
        std::string msg = "invalid demand-response config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw std::invalid_argument(msg);
    }
    const int G = cfg.num_contexts, S = 2 * cfg.fatigue_levels;

    std::vector<int> budgets(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) budgets[static_cast<std::size_t>(g)] = budget_from_ratio(cfg.ratio(g), cfg.num_users);

    CrbInstance inst;
    inst.chain = ContextChain::uniform(G, std::move(budgets));
    inst.discount = cfg.discount;
    inst.initial = InitialDistribution::uniform(G, S);
    inst.homogeneous = cfg.load_low == cfg.load_high;

    ArmModel base(G, S);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < kNumActions; ++a) {
                const auto act = static_cast<Action>(a);
                const auto dist = dr_transition(g + 1, decode(s), act, cfg.fatigue, cfg.fatigue_levels, G);
                std::copy(dist.begin(), dist.end(), base.row(g, s, act).begin());
            }
    base.normalize_rows();

    const auto loads = sample_loads(cfg);
    inst.arms.reserve(loads.size());
    for (double l : loads) {
        ArmModel arm = base;
        for (int g = 0; g < G; ++g)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < kNumActions; ++a)
                    arm.reward(g, s, static_cast<Action>(a)) = dr_reward(g + 1, decode(s), static_cast<Action>(a), l);
        inst.arms.push_back(std::move(arm));
    }
    return inst;
}

}  // namespace crb::dr
