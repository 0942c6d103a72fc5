// crb: command-line front end for the experiments.
//
//   crb <experiment> --config FILE [--seed U64] [--out DIR] [--runs N] [--horizon T] [--profile desk|paper]
//   crb validate --config FILE [--profile P]
//   crb dump-instance --config FILE [--profile P] [--out FILE]
//
// Exit status: 0 when the experiment's checks pass, 2 when they fail, 1 on error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "crb/config.hpp"
#include "crb/experiments.hpp"
#include "crb/io.hpp"

namespace {

struct Common {
    std::string config;
    std::string profile = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::string out;
};

void add_common(CLI::App* sub, Common& c, bool experiment) {
    sub->add_option("--config", c.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--profile", c.profile, "desk or paper, or a profile defined in the config");
    if (!experiment) return;
    sub->add_option("--seed", c.seed, "experiment seed");
    sub->add_option("--out", c.out, "output directory (default runs/<experiment>)");
    sub->add_option("--runs", c.runs, "Monte Carlo runs (samples for activation-check)")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", c.horizon, "rollout horizon")->check(CLI::NonNegativeNumber);
}

void apply_overrides(const std::string& experiment, const Common& c, crb::ExperimentConfig& cfg) {
    if (c.seed) cfg.seed = *c.seed;
    if (c.runs) {
        if (experiment == "asymptotic-sweep") cfg.sweep.runs = *c.runs;
        else if (experiment == "sandwich-check") cfg.sandwich.runs = *c.runs;
        else if (experiment == "activation-check") cfg.activation.samples = *c.runs;
        else cfg.simulation.runs = *c.runs;
    }
    if (c.horizon) {
        if (experiment == "sandwich-check") cfg.sandwich.horizon = *c.horizon;
        else cfg.simulation.horizon = *c.horizon;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextual restless bandits: dual solver, index policy and experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", crb::code_version());

    const char* experiments[] = {"dual-convergence", "asymptotic-sweep", "baseline-comparison",
                                 "online-learning",  "sandwich-check",   "activation-check"};
    const char* descriptions[] = {
        "solve the dual on the configured instance and record the multiplier history",
        "per-arm gap between the relaxed value and the index policy for a list of N",
        "coupled-seed comparison of the index policy against the context-free baseline",
        "epsilon-greedy epochs with estimated kernels against the known-model index policy",
        "relaxed value >= exact primal >= index policy on tiny instances",
        "expected activations from the steady state of the relaxed policy, per context",
    };
    Common common;
    for (std::size_t k = 0; k < std::size(experiments); ++k)
        add_common(app.add_subcommand(experiments[k], descriptions[k]), common, true);
    add_common(app.add_subcommand("validate", "parse the config and validate the instance"), common, false);
    auto* dump = app.add_subcommand("dump-instance", "write the built instance in the explicit JSON format");
    add_common(dump, common, false);
    std::string dump_out;
    dump->add_option("--out", dump_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        crb::ExperimentConfig cfg = crb::load_config(common.config, common.profile);
        if (name == "validate") {
            const auto inst = cfg.build_instance();
            std::cout << "ok: " << inst.num_arms() << " arms, " << inst.num_contexts() << " contexts, "
                      << inst.num_states() << " states, config hash " << crb::config_hash(cfg) << "\n";
            return 0;
        }
        if (name == "dump-instance") {
            const auto j = crb::instance_to_json(cfg.build_instance());
            if (dump_out.empty())
                std::cout << j.dump(2) << "\n";
            else
                crb::write_json(dump_out, j);
            return 0;
        }
        apply_overrides(name, common, cfg);
        const std::string out = common.out.empty() ? "runs/" + name : common.out;
        const auto res = crb::run_experiment(name, cfg, out);
        std::cout << res.summary.dump(2) << "\n";
        std::cout << name << ": " << (res.pass ? "PASS" : "FAIL") << " (" << res.dir.string() << ")\n";
        return res.pass ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "crb " << name << ": error: " << e.what() << "\n";
        return 1;
    }
}
