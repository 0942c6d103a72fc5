#pragma once

// Demand-response instance: each user is an arm with responsiveness z in {0,1}
// and fatigue level x in {1..fatigue_levels}. Contexts are labelled 1..|G|
// externally and 0..|G|-1 internally.
//
// Reward: a z l / ((g - x)^2 + 1).
// Fatigue: an activated responsive user becomes more fatigued w.p. p_up; a
// resting user recovers one level w.p. p_down; an activated unresponsive user
// keeps its level. Responsiveness is redrawn every step with
//   P(z' = 1) = clamp(s0 - s1 (x' - 1) + s2 (g - g_mid), 0.05, 0.95).

#include <cstdint>
#include <vector>

#include "crb/model.hpp"

namespace crb::dr {

struct FatigueParams {
    double p_up = 0.7;
    double p_down = 0.4;
    double s0 = 0.9;
    double s1 = 0.2;
    double s2 = 0.02;
    double sigma_min = 0.05;
    double sigma_max = 0.95;
};

struct DrConfig {
    int num_users = 50;
    int num_contexts = 6;
    int fatigue_levels = 4;
    std::vector<double> selection_ratio;  // per context; empty means 0.2 everywhere
    double discount = 0.97;
    double load_low = 8.0;
    double load_high = 12.0;
    FatigueParams fatigue;
    std::uint64_t seed = 1;

    double ratio(int g) const { return selection_ratio.empty() ? 0.2 : selection_ratio[static_cast<std::size_t>(g)]; }
};

/// Human-readable problems with the config; empty means valid.
std::vector<std::string> validate_config(const DrConfig& cfg);

struct DrState {
    int z = 0;  // responsiveness
    int x = 1;  // fatigue level, 1-based

    bool operator==(const DrState&) const = default;
};

inline StateId encode(DrState st) { return (st.x - 1) * 2 + st.z; }
inline DrState decode(StateId id) { return {id % 2, id / 2 + 1}; }

/// Load reduction for a 1-based context label.
double dr_reward(int context_label, DrState state, Action a, double load);

/// P(z' = 1 | g, x'), clamped to [sigma_min, sigma_max].
double responsiveness(const FatigueParams& p, int context_label, int next_fatigue, int num_contexts);

/// Next-state distribution over the 2 * fatigue_levels encoded states.
std::vector<double> dr_transition(int context_label, DrState state, Action a, const FatigueParams& params,
                                  int fatigue_levels, int num_contexts);

/// Uniform context chain, budgets floor(alpha_g N), per-user loads drawn once from
/// Unif[load_low, load_high] with the config seed.
CrbInstance build_dr_instance(const DrConfig& cfg);

/// Loads l_i baked into the instance (one per user), in arm order.
std::vector<double> sample_loads(const DrConfig& cfg);

}  // namespace crb::dr
