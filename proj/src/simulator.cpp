#include "crb/simulator.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace crb {

namespace {

EnvState make_streams(const CrbInstance& instance, std::uint64_t run_seed) {
    EnvState env;
    env.context_rng = Rng(derive_seed(run_seed, kContextStream));
    env.policy_rng = Rng(derive_seed(run_seed, kPolicyStream));
    env.arm_rng.reserve(instance.arms.size());
    for (std::size_t i = 0; i < instance.arms.size(); ++i)
        env.arm_rng.emplace_back(derive_seed(run_seed, kArmStreamBase + i));
    return env;
}

}  // namespace

EnvState reset(const CrbInstance& instance, std::uint64_t run_seed) {
    EnvState env = make_streams(instance, run_seed);
    env.g = env.context_rng.categorical(instance.initial.context);
    const auto& row = instance.initial.state[static_cast<std::size_t>(env.g)];
    env.states.resize(instance.arms.size());
    for (std::size_t i = 0; i < env.states.size(); ++i) env.states[i] = env.arm_rng[i].categorical(row);
    return env;
}

EnvState reset_at(const CrbInstance& instance, std::uint64_t run_seed, ContextId g0, std::vector<StateId> states) {
    if (states.size() != instance.arms.size())
        throw std::invalid_argument("reset_at: expected " + std::to_string(instance.arms.size()) + " arm states");
    EnvState env = make_streams(instance, run_seed);
    env.g = g0;
    env.states = std::move(states);
    return env;
}

void step(const CrbInstance& instance, EnvState& env, std::span<const Action> actions, std::span<double> rewards) {
    const auto n = instance.arms.size();
    if (actions.size() != n || rewards.size() != n)
        throw std::invalid_argument("step: action/reward vectors must have one entry per arm");
    int active = 0;
    for (auto a : actions) {
        if (a > 1) throw std::invalid_argument("step: actions must be 0 or 1");
        active += a;
    }
    const int budget = instance.chain.budgets[static_cast<std::size_t>(env.g)];
    if (active > budget)
        throw std::invalid_argument("step: " + std::to_string(active) + " activations exceed budget " +
                                    std::to_string(budget) + " in context " + std::to_string(env.g));

    for (std::size_t i = 0; i < n; ++i) {
        const auto& arm = instance.arms[i];
        const StateId s = env.states[i];
        rewards[i] = arm.reward(env.g, s, actions[i]);
        env.states[i] = Rng::sample_inverse_cdf(arm.row(env.g, s, actions[i]), env.arm_rng[i].uniform());
    }
    env.g = Rng::sample_inverse_cdf(instance.chain.row(env.g), env.context_rng.uniform());
    ++env.t;
}

double truncation_bound(const CrbInstance& instance, int horizon) {
    const double beta = instance.discount;
    return std::pow(beta, horizon) * instance.num_arms() * instance.max_abs_reward() / (1.0 - beta);
}

TrajectoryLog rollout(const CrbInstance& instance, const Policy& policy, int horizon, std::uint64_t run_seed,
                      bool record_steps) {
    TrajectoryLog log;
    log.horizon = horizon;
    log.truncation_bound = truncation_bound(instance, horizon);
    if (horizon <= 0) return log;

    EnvState env = reset(instance, run_seed);
    const auto n = instance.arms.size();
    std::vector<Action> actions(n);
    std::vector<double> rewards(n);
    log.contexts.reserve(static_cast<std::size_t>(horizon));
    if (record_steps) log.steps.reserve(static_cast<std::size_t>(horizon));

    double weight = 1.0;
    for (int t = 0; t < horizon; ++t) {
        policy.decide(env.g, env.states, env.policy_rng, actions);
        StepRecord rec;
        if (record_steps) {
            rec.t = t;
            rec.g = env.g;
            rec.states = env.states;
            rec.actions = actions;
        }
        log.contexts.push_back(env.g);
        step(instance, env, actions, rewards);
        double sum = 0.0;
        for (double r : rewards) sum += r;
        log.discounted_total += weight * sum;
        log.undiscounted_total += sum;
        weight *= instance.discount;
        if (record_steps) {
            rec.rewards = rewards;
            log.steps.push_back(std::move(rec));
        }
    }
    return log;
}

std::vector<double> epoch_rewards(const CrbInstance& instance, const Policy& policy, int epochs, int epoch_length,
                                  std::uint64_t run_seed) {
    EnvState env = reset(instance, run_seed);
    const auto n = instance.arms.size();
    std::vector<Action> actions(n);
    std::vector<double> rewards(n);
    std::vector<double> out(static_cast<std::size_t>(std::max(0, epochs)), 0.0);
    for (auto& total : out) {
        double weight = 1.0;
        for (int k = 0; k < epoch_length; ++k) {
            policy.decide(env.g, env.states, env.policy_rng, actions);
            step(instance, env, actions, rewards);
            for (double r : rewards) total += weight * r;
            weight *= instance.discount;
        }
    }
    return out;
}

void mean_and_stderr(std::span<const double> xs, double& mean, double& se) {
    const auto n = static_cast<double>(xs.size());
    mean = 0.0;
    se = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

namespace {

MonteCarloResult summarize(std::vector<double> totals, double bound) {
    MonteCarloResult out;
    out.totals = std::move(totals);
    out.truncation_bound = bound;
    mean_and_stderr(out.totals, out.mean, out.std_error);
    return out;
}

}  // namespace

MonteCarloResult monte_carlo_value_serial(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                          std::uint64_t seed) {
    std::vector<double> totals(static_cast<std::size_t>(runs));
    for (int r = 0; r < runs; ++r)
        totals[static_cast<std::size_t>(r)] =
            rollout(instance, policy, horizon, derive_seed(seed, static_cast<std::uint64_t>(r)), false).discounted_total;
    return summarize(std::move(totals), truncation_bound(instance, horizon));
}

MonteCarloResult monte_carlo_value_omp(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                       std::uint64_t seed) {
    std::vector<double> totals(static_cast<std::size_t>(runs));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < runs; ++r)
        totals[static_cast<std::size_t>(r)] =
            rollout(instance, policy, horizon, derive_seed(seed, static_cast<std::uint64_t>(r)), false).discounted_total;
    return summarize(std::move(totals), truncation_bound(instance, horizon));
}

MonteCarloResult monte_carlo_value(const CrbInstance& instance, const Policy& policy, int horizon, int runs,
                                   std::uint64_t seed, Exec exec) {
    if (runs < 2) throw std::invalid_argument("monte_carlo_value: runs must be at least 2");
    return exec == Exec::parallel ? monte_carlo_value_omp(instance, policy, horizon, runs, seed)
                                  : monte_carlo_value_serial(instance, policy, horizon, runs, seed);
}

SteadyState estimate_steady_state(const CrbInstance& instance, const ArmPolicy& policy, long burn_in, long samples,
                                  std::uint64_t seed, long min_per_context) {
    return estimate_steady_state(instance, RandomizedArmPolicy::from(policy), burn_in, samples, seed, min_per_context);
}

SteadyState estimate_steady_state(const CrbInstance& instance, const RandomizedArmPolicy& policy, long burn_in,
                                  long samples, std::uint64_t seed, long min_per_context) {
    if (instance.arms.empty()) throw std::invalid_argument("estimate_steady_state: instance has no arms");
    const auto& arm = instance.arms.front();
    const int G = instance.num_contexts(), S = instance.num_states();

    Rng ctx(derive_seed(seed, kContextStream));
    Rng arm_rng(derive_seed(seed, kArmStreamBase));
    Rng act_rng(derive_seed(seed, kPolicyStream));
    ContextId g = ctx.categorical(instance.initial.context);
    StateId s = arm_rng.categorical(instance.initial.state[static_cast<std::size_t>(g)]);

    SteadyState out;
    out.num_contexts = G;
    out.num_states = S;
    out.dist.assign(static_cast<std::size_t>(G) * S, 0.0);
    out.visits.assign(static_cast<std::size_t>(G), 0);
    std::vector<long> counts(out.dist.size(), 0);

    for (long t = 0; t < burn_in + samples; ++t) {
        if (t >= burn_in) {
            ++counts[static_cast<std::size_t>(g) * S + s];
            ++out.visits[static_cast<std::size_t>(g)];
        }
        const Action a = act_rng.uniform() < policy(g, s) ? 1 : 0;
        s = Rng::sample_inverse_cdf(arm.row(g, s, a), arm_rng.uniform());
        g = Rng::sample_inverse_cdf(instance.chain.row(g), ctx.uniform());
    }

    std::string starved;
    for (int c = 0; c < G; ++c) {
        const long v = out.visits[static_cast<std::size_t>(c)];
        if (v < min_per_context) {
            starved += (starved.empty() ? "" : ", ") + std::to_string(c) + " (" + std::to_string(v) + ")";
            continue;
        }
        for (int st = 0; st < S; ++st)
            out.dist[static_cast<std::size_t>(c) * S + st] =
                static_cast<double>(counts[static_cast<std::size_t>(c) * S + st]) / static_cast<double>(v);
    }
    if (!starved.empty())
        throw std::runtime_error("estimate_steady_state: fewer than " + std::to_string(min_per_context) +
                                 " samples in contexts " + starved);
    return out;
}

SteadyState exact_steady_state(const CrbInstance& instance, const RandomizedArmPolicy& policy) {
    if (instance.arms.empty()) throw std::invalid_argument("exact_steady_state: instance has no arms");
    const auto& arm = instance.arms.front();
    const int G = instance.num_contexts(), S = instance.num_states(), n = G * S;

    // Rows of (T' - I) with the last replaced by the normalization.
    Eigen::MatrixXd M = -Eigen::MatrixXd::Identity(n, n);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s) {
            const double p1 = policy(g, s);
            for (int g2 = 0; g2 < G; ++g2) {
                const double pg = instance.chain.prob(g, g2);
                if (pg == 0.0) continue;
                for (int s2 = 0; s2 < S; ++s2) {
                    const double ps = (1.0 - p1) * arm.prob(g, s, 0, s2) + p1 * arm.prob(g, s, 1, s2);
                    M(g2 * S + s2, g * S + s) += pg * ps;
                }
            }
        }
    M.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    const Eigen::VectorXd pi = M.colPivHouseholderQr().solve(rhs);

    SteadyState out;
    out.num_contexts = G;
    out.num_states = S;
    out.dist.assign(static_cast<std::size_t>(n), 0.0);
    out.visits.assign(static_cast<std::size_t>(G), 0);
    for (int g = 0; g < G; ++g) {
        double h = 0.0;
        for (int s = 0; s < S; ++s) h += std::max(0.0, pi(g * S + s));
        for (int s = 0; s < S; ++s)
            out.dist[static_cast<std::size_t>(g) * S + s] = h > 0.0 ? std::max(0.0, pi(g * S + s)) / h : 0.0;
    }
    return out;
}

double max_tv_distance(const SteadyState& a, const SteadyState& b) {
    if (a.num_contexts != b.num_contexts || a.num_states != b.num_states)
        throw std::invalid_argument("max_tv_distance: shape mismatch");
    double worst = 0.0;
    for (int g = 0; g < a.num_contexts; ++g) {
        double tv = 0.0;
        const auto ra = a.row(g), rb = b.row(g);
        for (std::size_t s = 0; s < ra.size(); ++s) tv += std::abs(ra[s] - rb[s]);
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

std::vector<ActivationRow> check_steady_activations(const CrbInstance& instance, const SteadyState& m, const ArmPolicy& policy,
                                    long samples, std::uint64_t seed) {
    return check_steady_activations(instance, m, RandomizedArmPolicy::from(policy), samples, seed);
}

std::vector<ActivationRow> check_steady_activations(const CrbInstance& instance, const SteadyState& m,
                                    const RandomizedArmPolicy& policy, long samples, std::uint64_t seed) {
    const int G = instance.num_contexts(), N = instance.num_arms();
    std::vector<ActivationRow> rows;
    std::vector<double> draws(static_cast<std::size_t>(samples));
    for (int g = 0; g < G; ++g) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
        const auto dist = m.row(g);
        for (auto& d : draws) {
            int active = 0;
            for (int i = 0; i < N; ++i) {
                const StateId s = rng.categorical(dist);
                active += rng.uniform() < policy(g, s) ? 1 : 0;
            }
            d = active;
        }
        ActivationRow row;
        row.g = g;
        row.budget = instance.chain.budgets[static_cast<std::size_t>(g)];
        mean_and_stderr(draws, row.mean_activations, row.std_error);
        row.pass = row.mean_activations <= row.budget + 3.0 * row.std_error;
        rows.push_back(row);
    }
    return rows;
}

long joint_state_count(const CrbInstance& instance) {
    long count = instance.num_contexts();
    for (int i = 0; i < instance.num_arms(); ++i) {
        if (count > LONG_MAX / std::max(1, instance.num_states())) return LONG_MAX;
        count *= instance.num_states();
    }
    return count;
}

double brute_force_primal(const CrbInstance& instance, int horizon) {
    require_valid(instance);
    if (horizon < 0 || horizon > kBruteForceMaxHorizon)
        throw std::invalid_argument("brute_force_primal: horizon must lie in [0, " +
                                    std::to_string(kBruteForceMaxHorizon) + "]");
    const long joint = joint_state_count(instance);
    if (joint > kBruteForceMaxJointStates)
        throw std::invalid_argument("brute_force_primal: joint state space has " +
                                    (joint == LONG_MAX ? std::string("too many") : std::to_string(joint)) +
                                    " states, cap is " + std::to_string(kBruteForceMaxJointStates));
    if (horizon == 0) return 0.0;

    const int G = instance.num_contexts(), S = instance.num_states(), N = instance.num_arms();
    const auto nJ = static_cast<std::size_t>(joint / G);
    const double beta = instance.discount;

    std::vector<std::size_t> stride(static_cast<std::size_t>(N) + 1, 1);
    for (int i = 0; i < N; ++i) stride[static_cast<std::size_t>(i) + 1] = stride[static_cast<std::size_t>(i)] * S;
    auto digit = [&](std::size_t j, int i) { return static_cast<StateId>((j / stride[static_cast<std::size_t>(i)]) % S); };

    std::vector<double> V(static_cast<std::size_t>(G) * nJ, 0.0), next(V.size());
    std::vector<double> U(nJ);
    std::vector<std::vector<double>> work(static_cast<std::size_t>(N) + 1, std::vector<double>(nJ));
    std::vector<Action> a(static_cast<std::size_t>(N), 0);

    for (int k = 0; k < horizon; ++k) {
        for (int g = 0; g < G; ++g) {
            // U(s') = sum_g' G(g'|g) V(g', s')
            std::fill(U.begin(), U.end(), 0.0);
            for (int g2 = 0; g2 < G; ++g2) {
                const double w = instance.chain.prob(g, g2);
                if (w == 0.0) continue;
                const double* v = V.data() + static_cast<std::size_t>(g2) * nJ;
                for (std::size_t j = 0; j < nJ; ++j) U[j] += w * v[j];
            }
            double* out = next.data() + static_cast<std::size_t>(g) * nJ;
            std::fill(out, out + nJ, -INFINITY);
            const int budget = instance.chain.budgets[static_cast<std::size_t>(g)];

            // Depth-first over action vectors, contracting one arm mode per level
            // so partial products are shared between vectors with a common prefix.
            std::function<void(int, const std::vector<double>&, int)> expand = [&](int i, const std::vector<double>& in,
                                                                                  int active) {
                if (i == N) {
                    for (std::size_t j = 0; j < nJ; ++j) {
                        double r = 0.0;
                        for (int m = 0; m < N; ++m)
                            r += instance.arms[static_cast<std::size_t>(m)].reward(g, digit(j, m), a[static_cast<std::size_t>(m)]);
                        out[j] = std::max(out[j], r + beta * in[j]);
                    }
                    return;
                }
                const auto& arm = instance.arms[static_cast<std::size_t>(i)];
                const std::size_t st = stride[static_cast<std::size_t>(i)];
                auto& tmp = work[static_cast<std::size_t>(i)];
                for (int act = 0; act < kNumActions; ++act) {
                    if (active + act > budget) break;
                    a[static_cast<std::size_t>(i)] = static_cast<Action>(act);
                    for (std::size_t j = 0; j < nJ; ++j) {
                        const StateId s = digit(j, i);
                        const std::size_t base = j - static_cast<std::size_t>(s) * st;
                        const auto row = arm.row(g, s, static_cast<Action>(act));
                        double acc = 0.0;
                        for (int s2 = 0; s2 < S; ++s2) acc += row[static_cast<std::size_t>(s2)] * in[base + static_cast<std::size_t>(s2) * st];
                        tmp[j] = acc;
                    }
                    expand(i + 1, tmp, active + act);
                }
                a[static_cast<std::size_t>(i)] = 0;
            };
            // work[i] is overwritten by the second branch at level i only after
            // the first branch's subtree has finished with it.
            expand(0, U, 0);
        }
        V.swap(next);
    }

    double value = 0.0;
    for (int g = 0; g < G; ++g) {
        const double pg = instance.initial.context[static_cast<std::size_t>(g)];
        if (pg == 0.0) continue;
        const auto& row = instance.initial.state[static_cast<std::size_t>(g)];
        for (std::size_t j = 0; j < nJ; ++j) {
            double p = pg;
            for (int i = 0; i < N && p != 0.0; ++i) p *= row[static_cast<std::size_t>(digit(j, i))];
            value += p * V[static_cast<std::size_t>(g) * nJ + j];
        }
    }
    return value;
}

}  // namespace crb
