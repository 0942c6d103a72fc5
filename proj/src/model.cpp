#include "crb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace crb {

ContextChain ContextChain::uniform(int num_contexts, std::vector<int> budgets) {
    ContextChain chain;
    chain.num_contexts = num_contexts;
    chain.transition.assign(static_cast<std::size_t>(num_contexts) * num_contexts, 1.0 / num_contexts);
    chain.budgets = std::move(budgets);
    return chain;
}

ArmModel::ArmModel(int num_contexts, int num_states)
    : num_contexts_(num_contexts),
      num_states_(num_states),
      transition_(static_cast<std::size_t>(num_contexts) * num_states * kNumActions * num_states, 0.0),
      reward_(static_cast<std::size_t>(num_contexts) * num_states * kNumActions, 0.0) {}

double ArmModel::max_abs_reward() const {
    double m = 0.0;
    for (double r : reward_) m = std::max(m, std::abs(r));
    return m;
}

void ArmModel::normalize_rows() {
    for (int g = 0; g < num_contexts_; ++g)
        for (int s = 0; s < num_states_; ++s)
            for (int a = 0; a < kNumActions; ++a) {
                auto r = row(g, s, static_cast<Action>(a));
                double sum = std::accumulate(r.begin(), r.end(), 0.0);
                if (sum > 0.0)
                    for (double& p : r) p /= sum;
            }
}

InitialDistribution InitialDistribution::uniform(int num_contexts, int num_states) {
    InitialDistribution d;
    d.context.assign(static_cast<std::size_t>(num_contexts), 1.0 / num_contexts);
    d.state.assign(static_cast<std::size_t>(num_contexts),
                   std::vector<double>(static_cast<std::size_t>(num_states), 1.0 / num_states));
    return d;
}

InitialDistribution InitialDistribution::point(int num_contexts, int num_states, ContextId g0, StateId s0) {
    InitialDistribution d;
    d.context.assign(static_cast<std::size_t>(num_contexts), 0.0);
    d.context[static_cast<std::size_t>(g0)] = 1.0;
    d.state.assign(static_cast<std::size_t>(num_contexts), std::vector<double>(static_cast<std::size_t>(num_states), 0.0));
    for (auto& row : d.state) row[static_cast<std::size_t>(s0)] = 1.0;
    return d;
}

double InitialDistribution::expect(std::span<const double> table_gs, int num_states) const {
    double total = 0.0;
    for (std::size_t g = 0; g < context.size(); ++g) {
        if (context[g] == 0.0) continue;
        double inner = 0.0;
        for (int s = 0; s < num_states; ++s)
            inner += state[g][static_cast<std::size_t>(s)] * table_gs[g * num_states + s];
        total += context[g] * inner;
    }
    return total;
}

double InitialDistribution::expect_context(std::span<const double> per_context) const {
    double total = 0.0;
    for (std::size_t g = 0; g < context.size(); ++g) total += context[g] * per_context[g];
    return total;
}

double CrbInstance::max_abs_reward() const {
    double m = 0.0;
    for (const auto& arm : arms) m = std::max(m, arm.max_abs_reward());
    return m;
}

namespace {

std::string fmt_sum(double sum) {
    std::ostringstream os;
    os.precision(15);
    os << "row sums to " << sum;
    return os.str();
}

bool is_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void check_distribution(std::span<const double> row, const std::string& path, std::vector<Violation>& out) {
    double sum = 0.0;
    bool entries_ok = true;
    for (double p : row) {
        entries_ok = entries_ok && is_prob(p);
        sum += p;
    }
    if (!entries_ok)
        out.push_back({path, "entry outside [0,1]"});
    else if (std::abs(sum - 1.0) > kRowTolerance)
        out.push_back({path, fmt_sum(sum)});
}

}  // namespace

std::vector<Violation> validate_instance(const CrbInstance& instance) {
    std::vector<Violation> out;
    const auto& chain = instance.chain;
    const int G = chain.num_contexts;
    const int N = instance.num_arms();

    if (G <= 0) {
        out.push_back({"chain.num_contexts", "must be positive"});
        return out;
    }
    if (chain.transition.size() != static_cast<std::size_t>(G) * G) {
        out.push_back({"chain.transition", "expected " + std::to_string(G * G) + " entries"});
    } else {
        for (int g = 0; g < G; ++g)
            check_distribution(chain.row(g), "chain.transition[g=" + std::to_string(g) + "]", out);
    }

    if (chain.budgets.size() != static_cast<std::size_t>(G)) {
        out.push_back({"chain.budgets", "length " + std::to_string(chain.budgets.size()) + " != num_contexts " +
                                            std::to_string(G)});
    } else {
        for (int g = 0; g < G; ++g) {
            int c = chain.budgets[static_cast<std::size_t>(g)];
            if (c < 0 || c > N)
                out.push_back({"chain.budgets[" + std::to_string(g) + "]",
                               "budget " + std::to_string(c) + " outside [0, " + std::to_string(N) + "]"});
        }
    }

    if (!(instance.discount > 0.0 && instance.discount < 1.0))
        out.push_back({"discount", "must lie strictly inside (0,1)"});

    if (N == 0) out.push_back({"arms", "at least one arm required"});

    const int S = instance.num_states();
    if (S <= 0 && N > 0) out.push_back({"arms[0].num_states", "must be positive"});

    for (int i = 0; i < N; ++i) {
        const auto& arm = instance.arms[static_cast<std::size_t>(i)];
        const std::string prefix = "arms[" + std::to_string(i) + "]";
        if (arm.num_states() != S) {
            out.push_back({prefix + ".num_states", "arms disagree on num_states"});
            continue;
        }
        if (arm.num_contexts() != G) {
            out.push_back({prefix + ".num_contexts", "does not match chain"});
            continue;
        }
        for (int g = 0; g < G; ++g)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < kNumActions; ++a) {
                    const std::string loc = "[g=" + std::to_string(g) + ",s=" + std::to_string(s) +
                                            ",a=" + std::to_string(a) + "]";
                    check_distribution(arm.row(g, s, static_cast<Action>(a)), prefix + ".transition" + loc, out);
                    if (!std::isfinite(arm.reward(g, s, static_cast<Action>(a))))
                        out.push_back({prefix + ".reward" + loc, "not finite"});
                }
    }

    if (instance.homogeneous) {
        for (int i = 1; i < N; ++i)
            if (!(instance.arms[static_cast<std::size_t>(i)] == instance.arms.front())) {
                out.push_back({"homogeneous", "flag set but arm " + std::to_string(i) + " differs from arm 0"});
                break;
            }
    }

    const auto& init = instance.initial;
    if (init.context.size() != static_cast<std::size_t>(G)) {
        out.push_back({"initial.context", "length must equal num_contexts"});
    } else {
        check_distribution(init.context, "initial.context", out);
    }
    if (init.state.size() != static_cast<std::size_t>(G)) {
        out.push_back({"initial.state", "one row per context required"});
    } else {
        for (int g = 0; g < G; ++g) {
            const auto& row = init.state[static_cast<std::size_t>(g)];
            if (static_cast<int>(row.size()) != S)
                out.push_back({"initial.state[" + std::to_string(g) + "]", "length must equal num_states"});
            else
                check_distribution(row, "initial.state[" + std::to_string(g) + "]", out);
        }
    }
    return out;
}

void require_valid(const CrbInstance& instance) {
    auto violations = validate_instance(instance);
    if (violations.empty()) return;
    std::string msg = "invalid instance:";
    for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
    throw std::invalid_argument(msg);
}

std::vector<double> stationary_context_distribution(const ContextChain& chain, double tol, int max_iters) {
    const int G = chain.num_contexts;
    const auto n = static_cast<std::size_t>(G);
    std::vector<double> h(n, 1.0 / G), next(n);

    auto residual_of = [&](const std::vector<double>& p) {
        double r = 0.0;
        for (int j = 0; j < G; ++j) {
            double v = 0.0;
            for (int i = 0; i < G; ++i) v += p[static_cast<std::size_t>(i)] * chain.prob(i, j);
            r = std::max(r, std::abs(v - p[static_cast<std::size_t>(j)]));
        }
        return r;
    };

    for (int it = 0; it < max_iters; ++it) {
        for (int j = 0; j < G; ++j) {
            double v = 0.0;
            for (int i = 0; i < G; ++i) v += h[static_cast<std::size_t>(i)] * chain.prob(i, j);
            next[static_cast<std::size_t>(j)] = 0.5 * (h[static_cast<std::size_t>(j)] + v);
        }
        double sum = std::accumulate(next.begin(), next.end(), 0.0);
        for (double& p : next) p /= sum;
        h.swap(next);
        if (residual_of(h) <= tol) return h;
    }
    double r = residual_of(h);
    throw ConvergenceError("stationary distribution did not converge; residual " + std::to_string(r), r);
}

int budget_from_ratio(double alpha, int num_arms) {
    return static_cast<int>(std::floor(alpha * num_arms + 1e-9));
}

}  // namespace crb
