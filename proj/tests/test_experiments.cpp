#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crb/experiments.hpp"

using namespace crb;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = CRB_CONFIG_DIR;

fs::path temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("crb_exp_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

// Three contexts, two fatigue levels, six identical users, two activations.
json tiny_doc() {
    return {{"seed", 5},
            {"instance",
             {{"num_users", 6},
              {"num_contexts", 3},
              {"fatigue_levels", 2},
              {"selection_ratio", 0.34},
              {"discount", 0.9},
              {"load_low", 10},
              {"load_high", 10}}},
            {"simulation", {{"horizon", 30}, {"runs", 8}}},
            {"sweep", {{"num_users", {3, 6}}, {"runs", 4}}},
            {"online", {{"epochs", 3}, {"epoch_length", 20}, {"burn_in_epochs", 1}, {"final_epochs", 1},
                        {"tv_min_visits", 5}}},
            {"sandwich", {{"instances", 2}, {"horizon", 3}, {"runs", 50}}},
            {"activation", {{"samples", 200}, {"steady_burn_in", 100}, {"steady_samples", 20000}}}};
}

const char* kNames[] = {"dual-convergence", "asymptotic-sweep", "baseline-comparison",
                        "online-learning",  "sandwich-check",   "activation-check"};

json zero_reward_instance() {
    json arm = {{"transition", {{{{0.5, 0.5}, {1.0, 0.0}}, {{0.2, 0.8}, {0.3, 0.7}}}}},
                {"reward", {{{0.0, 0.0}, {0.0, 0.0}}}}};
    return {{"builder", "inline"},
            {"instance",
             {{"discount", 0.8},
              {"num_states", 2},
              {"contexts", {{"transition", {{1.0}}}, {"budgets", {1}}}},
              {"num_arms", 2},
              {"arm", arm}}}};
}

}  // namespace

TEST(Experiments, EveryExperimentWritesItsFiles) {
    const auto cfg = load_config_json(tiny_doc());
    const std::map<std::string, std::vector<std::string>> files = {
        {"dual-convergence", {"dual_history.csv", "q_tables.csv"}},
        {"asymptotic-sweep", {"sweep.csv"}},
        {"baseline-comparison", {"baseline_runs.csv", "trajectory_crb_run0.csv"}},
        {"online-learning", {"online_epochs.csv", "learner_trace.csv"}},
        {"sandwich-check", {"sandwich.csv"}},
        {"activation-check", {"activations.csv", "steady_state.csv"}},
    };
    for (const char* name : kNames) {
        SCOPED_TRACE(name);
        const auto dir = temp_dir(std::string("files_") + name);
        const auto res = run_experiment(name, cfg, dir);
        EXPECT_EQ(res.experiment, name);
        EXPECT_TRUE(fs::exists(dir / "config.json"));
        const auto summary = read_json(dir / "summary.json");
        EXPECT_EQ(summary["experiment"], name);
        EXPECT_EQ(summary["config_hash"], config_hash(cfg));
        EXPECT_EQ(summary["seed"], 5);
        EXPECT_EQ(summary["version"], code_version());
        EXPECT_EQ(summary["pass"], res.pass);
        EXPECT_EQ(parse_config(read_json(dir / "config.json")).seed, cfg.seed);
        for (const auto& f : files.at(name)) EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(first_line(temp_dir("probe").parent_path() / "crb_exp_files_asymptotic-sweep" / "sweep.csv"),
              "N,v_rel_per_arm,v_ind_per_arm,stderr_per_arm,gap_per_arm,truncation_bound_per_arm,dual_converged,"
              "dual_iterations");
    EXPECT_EQ(first_line(fs::temp_directory_path() / "crb_exp_files_dual-convergence" / "dual_history.csv"),
              "iteration,lambda_0,lambda_1,lambda_2,slack_0,slack_1,slack_2,step_0,step_1,step_2,delta_norm,"
              "dual_objective");
}

TEST(Experiments, RerunsAreByteIdenticalAndSerialMatchesParallel) {
    auto doc = tiny_doc();
    const auto par = load_config_json(doc);
    doc["exec"] = "serial";
    const auto ser = load_config_json(doc);
    for (const char* name : kNames) {
        SCOPED_TRACE(name);
        const auto a = temp_dir(std::string("rerun_a_") + name), b = temp_dir(std::string("rerun_b_") + name),
                   c = temp_dir(std::string("rerun_c_") + name);
        run_experiment(name, par, a);
        run_experiment(name, par, b);
        run_experiment(name, ser, c);
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto file = entry.path().filename();
            EXPECT_EQ(slurp(a / file), slurp(b / file)) << file;
            if (file.extension() == ".csv") {
                EXPECT_EQ(slurp(a / file), slurp(c / file)) << file;
            }
        }
    }
}

TEST(Experiments, NonBindingBudgetStopsAtZeroMultipliers) {
    auto doc = tiny_doc();
    doc["instance"]["selection_ratio"] = 1.0;
    const auto res = run_dual_convergence(load_config_json(doc), temp_dir("nonbinding"));
    EXPECT_TRUE(res.pass);
    EXPECT_EQ(res.summary["dual"]["iterations"], 1);
    for (double l : res.summary["dual"]["lambda_star"].get<std::vector<double>>()) EXPECT_EQ(l, 0.0);
    EXPECT_FALSE(res.summary["lambda_varies"].get<bool>());
}

TEST(Experiments, InfiniteToleranceStopsAfterOneIteration) {
    auto doc = tiny_doc();
    doc["dual"] = {{"epsilon", "inf"}};
    const auto res = run_dual_convergence(load_config_json(doc), temp_dir("inf_eps"));
    EXPECT_TRUE(res.pass);
    EXPECT_EQ(res.summary["dual"]["iterations"], 1);
}

TEST(Experiments, SingleRunBaseline) {
    auto doc = tiny_doc();
    doc["simulation"]["runs"] = 1;
    const auto dir = temp_dir("one_run");
    const auto res = run_baseline_comparison(load_config_json(doc), dir);
    EXPECT_EQ(res.summary["runs"], 1);
    EXPECT_EQ(res.summary["crb"]["std_error"], 0.0);
    std::ifstream in(dir / "baseline_runs.csv");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 2);
}

TEST(Experiments, SweepWithOneSize) {
    auto doc = tiny_doc();
    doc["sweep"]["num_users"] = {4};
    const auto res = run_asymptotic_sweep(load_config_json(doc), temp_dir("sweep_one"));
    ASSERT_EQ(res.summary["rows"].size(), 1u);
    EXPECT_EQ(res.summary["rows"][0]["N"], 4);
}

TEST(Experiments, SweepRejectsHeterogeneousLoads) {
    auto doc = tiny_doc();
    doc["instance"]["load_low"] = 8;
    EXPECT_THROW(run_asymptotic_sweep(load_config_json(doc), temp_dir("sweep_het")), ConfigError);
    EXPECT_THROW(run_activation_check(load_config_json(doc), temp_dir("activation_het")), ConfigError);
}

TEST(Experiments, SingleArmFullBudgetSandwichCoincides) {
    // One arm that may always be activated: the relaxation is exact, so the
    // truncated primal sits between V_Rel minus the tail and V_Rel.
    const json doc = {{"seed", 2},
                      {"sandwich", {{"instances", 3}, {"horizon", 5}, {"runs", 400},
                                    {"random", {{"num_arms", 1}, {"budget", 1}, {"num_states", 3}}}}}};
    const auto res = run_sandwich_check(load_config_json(doc), temp_dir("sandwich_n1"));
    EXPECT_TRUE(res.pass);
    for (const auto& row : res.summary["instances"]) {
        const double v_rel = row["V_Rel"], v_pri = row["V_Pri_exact"], bound = row["truncation_bound"];
        EXPECT_EQ(row["pass"], true);
        EXPECT_EQ(res.summary["instances"].size(), 3u);
        EXPECT_LE(v_pri, v_rel + 1e-7);
        EXPECT_GE(v_pri, v_rel - bound - 1e-7);
    }
}

TEST(Experiments, ZeroRewardInstanceGivesZeros) {
    json doc = {{"instance", zero_reward_instance()},
                {"sandwich", {{"source", "instance"}, {"horizon", 4}, {"runs", 10}}},
                {"simulation", {{"horizon", 10}, {"runs", 3}}}};
    const auto cfg = load_config_json(doc);
    const auto dual = run_dual_convergence(cfg, temp_dir("zero_dual"));
    EXPECT_EQ(dual.summary["dual"]["relaxed_value"], 0.0);
    EXPECT_EQ(dual.summary["dual"]["iterations"], 1);
    const auto sw = run_sandwich_check(cfg, temp_dir("zero_sandwich"));
    EXPECT_TRUE(sw.pass);
    EXPECT_EQ(sw.summary["instances"][0]["V_Pri_exact"], 0.0);
    EXPECT_EQ(sw.summary["instances"][0]["V_Ind_mc"], 0.0);
    const auto base = run_baseline_comparison(cfg, temp_dir("zero_base"));
    EXPECT_EQ(base.summary["crb"]["mean"], 0.0);
    EXPECT_EQ(base.summary["baseline"]["mean"], 0.0);
    EXPECT_FALSE(base.pass);  // equal totals never count as wins
}

TEST(Experiments, SandwichRefusesOversizedProblemsBeforeWriting) {
    auto doc = tiny_doc();
    doc["sandwich"]["random"] = {{"num_arms", 20}, {"num_states", 2}};
    const auto dir = temp_dir("too_big");
    EXPECT_THROW(run_sandwich_check(load_config_json(doc), dir), std::invalid_argument);
    EXPECT_FALSE(fs::exists(dir));
    auto deep = tiny_doc();
    deep["sandwich"]["horizon"] = 7;
    EXPECT_THROW(run_sandwich_check(load_config_json(deep), dir), std::invalid_argument);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Experiments, SandwichOnShippedInlineInstance) {
    const auto res = run_sandwich_check(load_config(kConfigs / "tiny_inline.json"), temp_dir("inline_sandwich"));
    EXPECT_TRUE(res.pass);
    EXPECT_EQ(res.summary["instances"].size(), 1u);
}

TEST(Experiments, Dispatch) {
    for (const char* name : kNames) EXPECT_TRUE(is_experiment(name));
    EXPECT_FALSE(is_experiment("validate"));
    EXPECT_THROW(run_experiment("fig-9", load_config_json(tiny_doc()), temp_dir("nope")), std::invalid_argument);
}
