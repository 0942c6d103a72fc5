#include "crb/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "crb/simulator.hpp"

namespace crb {

std::string to_string(Estimator e) { return e == Estimator::laplace ? "laplace" : "raw"; }

Estimator estimator_from_string(const std::string& s) {
    if (s == "laplace") return Estimator::laplace;
    if (s == "raw") return Estimator::raw;
    throw std::invalid_argument("unknown estimator '" + s + "' (expected laplace or raw)");
}

EmpiricalModel EmpiricalModel::empty(int num_contexts, int num_states) {
    EmpiricalModel m;
    m.num_contexts = num_contexts;
    m.num_states = num_states;
    const auto tuples = static_cast<std::size_t>(num_contexts) * num_states * kNumActions;
    m.visits.assign(tuples, 0);
    m.transitions.assign(tuples * num_states, 0);
    return m;
}

void EmpiricalModel::record(ContextId g, StateId s, Action a, StateId next) {
    const auto k = (static_cast<std::size_t>(g) * num_states + s) * kNumActions + a;
    ++visits[k];
    ++transitions[k * num_states + next];
}

ArmModel EmpiricalModel::estimate(const ArmModel& rewards_from, Estimator estimator) const {
    const int G = num_contexts, S = num_states;
    ArmModel out(G, S);
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < kNumActions; ++a) {
                const auto act = static_cast<Action>(a);
                out.reward(g, s, act) = rewards_from.reward(g, s, act);
                const double m = static_cast<double>(visit_count(g, s, act));
                auto row = out.row(g, s, act);
                for (int s2 = 0; s2 < S; ++s2) {
                    const double c = static_cast<double>(transition_count(g, s, act, s2));
                    if (estimator == Estimator::laplace)
                        row[static_cast<std::size_t>(s2)] = (c + 1.0) / (m + S);
                    else
                        row[static_cast<std::size_t>(s2)] = m > 0.0 ? c / m : 1.0 / S;
                }
            }
    return out;
}

double epsilon_for_epoch(const LearnerOptions& opts, int epoch) {
    return std::min(1.0, opts.epsilon0 / (epoch + 1.0));
}

LearnerState init_learner(const CrbInstance& skeleton, const LearnerOptions& opts) {
    if (opts.epoch_length < 1) throw std::invalid_argument("init_learner: epoch_length must be at least 1");
    LearnerState st;
    st.skeleton = skeleton;
    st.options = opts;
    st.epsilon = epsilon_for_epoch(opts, 0);
    const int G = skeleton.num_contexts(), S = skeleton.num_states();
    st.models.assign(opts.pool_arms ? 1 : skeleton.arms.size(), EmpiricalModel::empty(G, S));
    st.lambda = MultiplierVector::zeros(G);
    st.rng = Rng(derive_seed(opts.seed, kPolicyStream));
    return st;
}

CrbInstance estimated_instance(const LearnerState& state) {
    CrbInstance inst = state.skeleton;
    for (std::size_t i = 0; i < inst.arms.size(); ++i)
        inst.arms[i] = state.model_for(i).estimate(state.skeleton.arms[i], state.options.estimator);
    // Pooled estimates keep the skeleton's homogeneity; per-arm counts never coincide.
    inst.homogeneous = state.skeleton.homogeneous && state.options.pool_arms;
    return inst;
}

void plan_epoch(LearnerState& state) {
    const CrbInstance est = estimated_instance(state);
    DualOptions dual = state.options.dual;
    if (state.options.warm_start_lambda && state.epoch > 0) dual.initial_lambda = state.lambda;
    const DualSolveReport report = solve_dual(est, dual);
    state.lambda = report.lambda_star;
    state.q_tables.clear();
    state.q_tables.reserve(report.per_arm.size());
    for (const auto& sol : report.per_arm) state.q_tables.push_back(sol.q);
    state.plan_log.push_back({state.epoch, report.converged, report.iterations});
}

bool act(LearnerState& state, ContextId g, std::span<const StateId> states, std::span<Action> out) {
    const auto n = states.size();
    const int budget = std::min<int>(state.skeleton.chain.budgets[static_cast<std::size_t>(g)], static_cast<int>(n));
    const bool explore = state.rng.uniform() < state.epsilon;
    if (explore) {
        std::fill(out.begin(), out.end(), Action{0});
        std::vector<std::size_t> ids(n);
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        for (int k = 0; k < budget; ++k) {
            const auto j = static_cast<std::size_t>(k) + state.rng.below(n - static_cast<std::size_t>(k));
            std::swap(ids[static_cast<std::size_t>(k)], ids[j]);
            out[ids[static_cast<std::size_t>(k)]] = 1;
        }
        return true;
    }
    if (state.q_tables.size() != n) throw std::logic_error("act: plan_epoch has not been run");
    select_arms(compute_indices(state.q_tables, g, states), budget, state.options.selection, &state.rng, out);
    return false;
}

void observe(LearnerState& state, ContextId g, std::span<const StateId> states, std::span<const Action> actions,
             std::span<const StateId> next_states) {
    const auto n = state.skeleton.arms.size();
    if (states.size() != n || actions.size() != n || next_states.size() != n)
        throw std::invalid_argument("observe: record dimensions do not match the number of arms");
    for (std::size_t i = 0; i < n; ++i) {
        auto& model = state.models.size() == 1 ? state.models[0] : state.models[i];
        model.record(g, states[i], actions[i], next_states[i]);
    }
}

void end_epoch(LearnerState& state) {
    ++state.epoch;
    state.epsilon = epsilon_for_epoch(state.options, state.epoch);
}

double max_tv_error(const LearnerState& state, const CrbInstance& truth, long min_visits, long* qualifying) {
    double worst = -1.0;
    long count = 0;
    const auto n = state.models.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& model = state.models[i];
        const auto& true_arm = truth.arms[i];
        const ArmModel est = model.estimate(true_arm, state.options.estimator);
        for (int g = 0; g < model.num_contexts; ++g)
            for (int s = 0; s < model.num_states; ++s)
                for (int a = 0; a < kNumActions; ++a) {
                    const auto act = static_cast<Action>(a);
                    if (model.visit_count(g, s, act) < min_visits) continue;
                    ++count;
                    double tv = 0.0;
                    const auto p = est.row(g, s, act), q = true_arm.row(g, s, act);
                    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
                    worst = std::max(worst, 0.5 * tv);
                }
    }
    if (qualifying) *qualifying = count;
    return worst;
}

std::uint64_t online_env_seed(std::uint64_t seed) { return derive_seed(seed, 0xE4); }

OnlineRun run_online(const CrbInstance& truth, const LearnerOptions& opts, int epochs, bool keep_trace) {
    require_valid(truth);
    OnlineRun run;
    run.final_state = init_learner(truth, opts);
    auto& st = run.final_state;
    EnvState env = reset(truth, online_env_seed(opts.seed));
    const auto n = truth.arms.size();
    std::vector<Action> actions(n);
    std::vector<double> rewards(n);
    std::vector<StateId> before(n);
    long t = 0;

    for (int e = 0; e < epochs; ++e) {
        plan_epoch(st);
        EpochSummary sum;
        sum.epoch = st.epoch;
        sum.epsilon = st.epsilon;
        sum.plan_converged = st.plan_log.back().converged;
        sum.plan_iterations = st.plan_log.back().iterations;
        sum.lambda = st.lambda;
        double weight = 1.0, undiscounted = 0.0;
        for (int k = 0; k < opts.epoch_length; ++k, ++t) {
            const ContextId g = env.g;
            before = env.states;
            const bool explored = act(st, g, before, actions);
            step(truth, env, actions, rewards);
            observe(st, g, before, actions, env.states);
            double r = 0.0;
            for (double x : rewards) r += x;
            sum.discounted_reward += weight * r;
            undiscounted += r;
            weight *= truth.discount;
            sum.explored_steps += explored ? 1 : 0;
            if (keep_trace) run.trace.push_back({t, st.epoch, st.epsilon, g, r, explored});
        }
        sum.mean_step_reward = undiscounted / opts.epoch_length;
        sum.tv_error = max_tv_error(st, truth, 1);
        run.epochs.push_back(std::move(sum));
        end_epoch(st);
    }
    return run;
}

}  // namespace crb
