#include "crb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crb/dual_solver.hpp"
#include "crb/index_policy.hpp"
#include "crb/learner.hpp"
#include "crb/relaxed_policy.hpp"
#include "crb/simulator.hpp"

#ifndef CRB_VERSION
#define CRB_VERSION "dev"
#endif

namespace crb {

namespace fs = std::filesystem;

std::string code_version() { return CRB_VERSION; }

namespace {

ExperimentResult start(const std::string& name, const ExperimentConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    write_json(out / "config.json", to_json(cfg));
    ExperimentResult r;
    r.experiment = name;
    r.dir = out;
    r.summary = {{"experiment", name},
                 {"config_hash", config_hash(cfg)},
                 {"seed", cfg.seed},
                 {"version", code_version()}};
    return r;
}

ExperimentResult& finish(ExperimentResult& r) {
    r.summary["pass"] = r.pass;
    write_json(r.dir / "summary.json", r.summary);
    return r;
}

// Monte Carlo without the runs >= 2 guard, so a single run is allowed.
MonteCarloResult evaluate(const CrbInstance& inst, const Policy& policy, int horizon, int runs, std::uint64_t seed,
                          Exec exec) {
    return exec == Exec::parallel ? monte_carlo_value_omp(inst, policy, horizon, runs, seed)
                                  : monte_carlo_value_serial(inst, policy, horizon, runs, seed);
}

json dual_json(const DualSolveReport& rep) {
    return {{"converged", rep.converged},
            {"iterations", rep.iterations},
            {"lambda_star", rep.lambda_star.values},
            {"final_slack", rep.final_slack},
            {"relaxed_value", rep.relaxed_value}};
}

}  // namespace

ExperimentResult run_dual_convergence(const ExperimentConfig& cfg, const fs::path& out) {
    auto res = start("dual-convergence", cfg, out);
    const CrbInstance inst = cfg.build_instance();
    const DualSolveReport rep = solve_dual(inst, cfg.dual);
    write_dual_history_csv(out / "dual_history.csv", rep);
    write_q_tables_csv(out / "q_tables.csv", rep.per_arm);

    const auto [lo, hi] = std::minmax_element(rep.lambda_star.values.begin(), rep.lambda_star.values.end());
    res.summary["dual"] = dual_json(rep);
    res.summary["epsilon"] = std::isinf(cfg.dual.epsilon) ? json("inf") : json(cfg.dual.epsilon);
    res.summary["max_iters"] = cfg.dual.max_iters;
    res.summary["lambda_spread"] = *hi - *lo;
    res.summary["lambda_varies"] = *hi - *lo > cfg.dual.epsilon;
    res.pass = rep.converged;
    return finish(res);
}

ExperimentResult run_asymptotic_sweep(const ExperimentConfig& cfg, const fs::path& out) {
    auto res = start("asymptotic-sweep", cfg, out);
    CsvWriter csv(out / "sweep.csv", {"N", "v_rel_per_arm", "v_ind_per_arm", "stderr_per_arm", "gap_per_arm",
                                      "truncation_bound_per_arm", "dual_converged", "dual_iterations"});
    json rows = json::array();
    bool positive = true;
    double gap_small = 0.0, gap_large = 0.0;
    int n_small = 0, n_large = 0;
    for (int N : cfg.sweep.num_users) {
        const CrbInstance inst = cfg.build_instance(N);
        if (!inst.homogeneous)
            throw ConfigError("/instance: the sweep needs a homogeneous instance (equal load_low and load_high)");
        const DualSolveReport rep = solve_dual(inst, cfg.dual);
        const IndexPolicy policy = make_index_policy(inst, rep, cfg.selection);
        const auto mc = evaluate(inst, policy, cfg.simulation.horizon, cfg.sweep.runs,
                                 derive_seed(cfg.seed, static_cast<std::uint64_t>(N)), cfg.exec);
        const double gap = (rep.relaxed_value - mc.mean) / N;
        csv.field(N).field(rep.relaxed_value / N).field(mc.mean / N).field(mc.std_error / N).field(gap);
        csv.field(mc.truncation_bound / N).field(int{rep.converged}).field(rep.iterations);
        csv.end_row();
        rows.push_back({{"N", N},
                        {"v_rel_per_arm", rep.relaxed_value / N},
                        {"v_ind_per_arm", mc.mean / N},
                        {"stderr_per_arm", mc.std_error / N},
                        {"gap_per_arm", gap}});
        positive = positive && gap > 0.0;
        if (n_small == 0 || N < n_small) n_small = N, gap_small = gap;
        if (N > n_large) n_large = N, gap_large = gap;
    }
    const bool shrinks = cfg.sweep.num_users.size() < 2 || gap_large < gap_small / 2.0;
    res.summary["rows"] = std::move(rows);
    res.summary["gap_positive"] = positive;
    res.summary["gap_halves"] = shrinks;
    res.pass = positive && shrinks;
    return finish(res);
}

ExperimentResult run_baseline_comparison(const ExperimentConfig& cfg, const fs::path& out) {
    auto res = start("baseline-comparison", cfg, out);
    const CrbInstance inst = cfg.build_instance();
    const DualSolveReport rep = solve_dual(inst, cfg.dual);
    const IndexPolicy crb_policy = make_index_policy(inst, rep, cfg.selection);
    const BaselineResult base = baseline_policy(inst, cfg.dual, cfg.selection);

    const int T = cfg.simulation.horizon, runs = cfg.simulation.runs;
    const auto a = evaluate(inst, crb_policy, T, runs, cfg.seed, cfg.exec);
    const auto b = evaluate(inst, base.policy, T, runs, cfg.seed, cfg.exec);
    CsvWriter csv(out / "baseline_runs.csv", {"run", "crb_total", "baseline_total", "crb_wins"});
    int wins = 0;
    for (int r = 0; r < runs; ++r) {
        const double x = a.totals[static_cast<std::size_t>(r)], y = b.totals[static_cast<std::size_t>(r)];
        wins += x > y;
        csv.field(r).field(x).field(y).field(int{x > y});
        csv.end_row();
    }
    if (cfg.baseline.write_trajectory && T > 0)
        write_trajectory_csv(out / "trajectory_crb_run0.csv", rollout(inst, crb_policy, T, derive_seed(cfg.seed, 0)));

    const double win_rate = static_cast<double>(wins) / runs;
    res.summary["crb"] = {{"mean", a.mean}, {"std_error", a.std_error}, {"dual", dual_json(rep)}};
    res.summary["baseline"] = {{"mean", b.mean},
                               {"std_error", b.std_error},
                               {"budget", base.marginal.chain.budgets.front()},
                               {"dual", dual_json(base.report)}};
    res.summary["truncation_bound"] = a.truncation_bound;
    res.summary["runs"] = runs;
    res.summary["wins"] = wins;
    res.summary["win_rate"] = win_rate;
    res.pass = win_rate >= cfg.baseline.min_win_rate && a.mean > b.mean;
    return finish(res);
}

ExperimentResult run_online_learning(const ExperimentConfig& cfg, const fs::path& out) {
    auto res = start("online-learning", cfg, out);
    const auto& oc = cfg.online;
    const CrbInstance truth = cfg.build_instance();
    const LearnerOptions lo = cfg.learner_options();
    const OnlineRun run = run_online(truth, lo, oc.epochs, oc.write_trace);

    const DualSolveReport rep = solve_dual(truth, cfg.dual);
    const IndexPolicy known = make_index_policy(truth, rep, cfg.selection);
    const auto reference = epoch_rewards(truth, known, oc.epochs, oc.epoch_length, online_env_seed(lo.seed));

    CsvWriter csv(out / "online_epochs.csv", {"epoch", "epsilon", "discounted_reward", "mean_step_reward",
                                              "reference_reward", "tv_error", "explored_steps", "plan_converged",
                                              "plan_iterations"});
    int plan_failures = 0;
    for (const auto& e : run.epochs) {
        csv.field(e.epoch).field(e.epsilon).field(e.discounted_reward).field(e.mean_step_reward);
        csv.field(reference[static_cast<std::size_t>(e.epoch)]).field(e.tv_error).field(e.explored_steps);
        csv.field(int{e.plan_converged}).field(e.plan_iterations);
        csv.end_row();
        plan_failures += !e.plan_converged;
    }
    if (oc.write_trace) {
        CsvWriter tr(out / "learner_trace.csv", {"t", "epoch", "epsilon", "g", "reward_sum", "exploring"});
        for (const auto& row : run.trace) {
            tr.field(row.t).field(row.epoch).field(row.epsilon).field(row.g).field(row.reward_sum);
            tr.field(int{row.exploring});
            tr.end_row();
        }
    }

    long qualifying = 0;
    const double tv = max_tv_error(run.final_state, truth, oc.tv_min_visits, &qualifying);
    double learner_mean = 0.0, reference_mean = 0.0;
    for (int e = oc.epochs - oc.final_epochs; e < oc.epochs; ++e)
        learner_mean += run.epochs[static_cast<std::size_t>(e)].discounted_reward / oc.final_epochs;
    for (int e = oc.burn_in_epochs; e < oc.epochs; ++e)
        reference_mean += reference[static_cast<std::size_t>(e)] / (oc.epochs - oc.burn_in_epochs);
    const double ratio = reference_mean != 0.0 ? learner_mean / reference_mean : 0.0;

    const bool tv_ok = qualifying > 0 && tv <= oc.tv_threshold;
    const bool reward_ok = learner_mean >= (1.0 - oc.reward_tolerance) * reference_mean;
    res.summary["tv_error"] = tv;
    res.summary["tv_qualifying_tuples"] = qualifying;
    res.summary["tv_ok"] = tv_ok;
    res.summary["learner_final_mean"] = learner_mean;
    res.summary["reference_mean"] = reference_mean;
    res.summary["reward_ratio"] = ratio;
    res.summary["reward_ok"] = reward_ok;
    res.summary["plan_failures"] = plan_failures;
    res.summary["learned_lambda"] = run.final_state.lambda.values;
    res.summary["reference_dual"] = dual_json(rep);
    res.pass = tv_ok && reward_ok;
    return finish(res);
}

ExperimentResult run_sandwich_check(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& sc = cfg.sandwich;
    std::vector<CrbInstance> instances;
    if (sc.source == "instance") {
        instances.push_back(cfg.build_instance());
    } else {
        for (int k = 0; k < sc.instances; ++k)
            instances.push_back(random_instance(sc.random, derive_seed(cfg.seed, static_cast<std::uint64_t>(k))));
    }
    if (sc.horizon > kBruteForceMaxHorizon)
        throw std::invalid_argument("sandwich-check: horizon " + std::to_string(sc.horizon) + " exceeds the cap of " +
                                    std::to_string(kBruteForceMaxHorizon));
    for (std::size_t k = 0; k < instances.size(); ++k)
        if (joint_state_count(instances[k]) > kBruteForceMaxJointStates)
            throw std::invalid_argument("sandwich-check: instance " + std::to_string(k) + " has " +
                                        std::to_string(joint_state_count(instances[k])) +
                                        " joint states, above the cap of " +
                                        std::to_string(kBruteForceMaxJointStates));

    auto res = start("sandwich-check", cfg, out);
    CsvWriter csv(out / "sandwich.csv", {"instance", "v_rel", "truncation_bound", "v_pri", "v_ind_mean",
                                         "v_ind_stderr", "upper_ok", "lower_ok"});
    json rows = json::array();
    bool all = true;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto& inst = instances[k];
        const DualSolveReport rep = solve_dual(inst, cfg.dual);
        const double bound = truncation_bound(inst, sc.horizon);
        const double v_pri = brute_force_primal(inst, sc.horizon);
        const IndexPolicy policy = make_index_policy(inst, rep, cfg.selection);
        const auto mc = evaluate(inst, policy, sc.horizon, sc.runs, derive_seed(cfg.seed, 0x5A00 + k), cfg.exec);
        const double slack = 1e-9 * std::max(1.0, std::abs(v_pri));
        const bool upper = rep.relaxed_value + bound >= v_pri - slack;
        const bool lower = v_pri >= mc.mean - 3.0 * mc.std_error - slack;
        csv.field(static_cast<long long>(k)).field(rep.relaxed_value).field(bound).field(v_pri).field(mc.mean);
        csv.field(mc.std_error).field(int{upper}).field(int{lower});
        csv.end_row();
        rows.push_back({{"V_Rel", rep.relaxed_value},
                        {"truncation_bound", bound},
                        {"V_Pri_exact", v_pri},
                        {"V_Ind_mc", mc.mean},
                        {"V_Ind_stderr", mc.std_error},
                        {"pass", upper && lower}});
        all = all && upper && lower;
    }
    res.summary["instances"] = std::move(rows);
    res.summary["horizon"] = sc.horizon;
    res.pass = all;
    return finish(res);
}

ExperimentResult run_activation_check(const ExperimentConfig& cfg, const fs::path& out) {
    auto res = start("activation-check", cfg, out);
    const auto& lc = cfg.activation;
    const CrbInstance inst = cfg.build_instance();
    if (!inst.homogeneous) throw ConfigError("/instance: the steady-state check needs a homogeneous instance");
    const DualSolveReport rep = solve_dual(inst, cfg.dual);
    const auto relaxed = stationary_relaxed_policy(inst, rep.per_arm.front().policy);
    const SteadyState exact = exact_steady_state(inst, relaxed.policy);
    const SteadyState simulated =
        estimate_steady_state(inst, relaxed.policy, lc.steady_burn_in, lc.steady_samples, derive_seed(cfg.seed, 1));
    const double tv = max_tv_distance(exact, simulated);
    const auto rows = check_steady_activations(inst, exact, relaxed.policy, lc.samples, derive_seed(cfg.seed, 2));

    {
        CsvWriter csv(out / "activations.csv", {"g", "mean_activations", "std_error", "budget", "pass"});
        for (const auto& r : rows) {
            csv.field(r.g).field(r.mean_activations).field(r.std_error).field(r.budget).field(int{r.pass});
            csv.end_row();
        }
    }
    {
        CsvWriter csv(out / "steady_state.csv", {"g", "s", "m_exact", "m_simulated", "p_activate"});
        for (int g = 0; g < exact.num_contexts; ++g)
            for (int s = 0; s < exact.num_states; ++s) {
                csv.field(g).field(s).field(exact.row(g)[static_cast<std::size_t>(s)]);
                csv.field(simulated.row(g)[static_cast<std::size_t>(s)]).field(relaxed.policy(g, s));
                csv.end_row();
            }
    }
    bool all = true;
    for (const auto& r : rows) all = all && r.pass;
    res.summary["dual"] = dual_json(rep);
    res.summary["activation_fraction"] = relaxed.activation_fraction;
    res.summary["reward_rate_per_arm"] = relaxed.reward_rate;
    res.summary["steady_state_tv"] = tv;
    res.summary["steady_state_ok"] = tv <= lc.steady_tv_tolerance;
    res.summary["all_contexts_pass"] = all;
    res.pass = all && tv <= lc.steady_tv_tolerance;
    return finish(res);
}

namespace {

using Runner = ExperimentResult (*)(const ExperimentConfig&, const fs::path&);

struct Entry {
    const char* name;
    Runner run;
};

constexpr Entry kExperiments[] = {
    {"dual-convergence", run_dual_convergence},   {"asymptotic-sweep", run_asymptotic_sweep},
    {"baseline-comparison", run_baseline_comparison}, {"online-learning", run_online_learning},
    {"sandwich-check", run_sandwich_check},       {"activation-check", run_activation_check},
};

}  // namespace

bool is_experiment(const std::string& name) {
    return std::any_of(std::begin(kExperiments), std::end(kExperiments), [&](const Entry& e) { return name == e.name; });
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& cfg, const fs::path& out) {
    for (const auto& e : kExperiments)
        if (name == e.name) return e.run(cfg, out);
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

}  // namespace crb
