#pragma once

// Experiment drivers behind the crb CLI. Each one writes into its own
// directory: config.json (the fully resolved configuration), one or more
// CSV files and summary.json (config hash, seed, code version, metrics and
// the pass flag). Outputs depend only on (config, seed).

#include <filesystem>
#include <string>

#include "crb/config.hpp"
#include "crb/io.hpp"

namespace crb {

struct ExperimentResult {
    std::string experiment;
    bool pass = false;
    json summary;
    std::filesystem::path dir;
};

/// Code version string written into every summary.
std::string code_version();

ExperimentResult run_dual_convergence(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentResult run_asymptotic_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentResult run_baseline_comparison(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentResult run_online_learning(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Checks the joint-state caps for every instance before solving anything.
ExperimentResult run_sandwich_check(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentResult run_activation_check(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Dispatch by subcommand name (dual-convergence, asymptotic-sweep, ...).
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& cfg,
                                const std::filesystem::path& out);
bool is_experiment(const std::string& name);

}  // namespace crb
