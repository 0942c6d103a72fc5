#pragma once

// Experiment configuration, read from a JSON file (comments allowed). Every
// section is optional and falls back to the desk-scale defaults below.
// Unknown keys and type mismatches raise ConfigError with a JSON-pointer
// locator. The schema is documented in README.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crb/demand_response.hpp"
#include "crb/dual_solver.hpp"
#include "crb/index_policy.hpp"
#include "crb/io.hpp"
#include "crb/learner.hpp"
#include "crb/model.hpp"
#include "crb/random_instance.hpp"

namespace crb {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InstanceConfig {
    std::string builder = "demand_response";  // demand_response | inline | random
    dr::DrConfig dr;
    json inline_instance;  // builder == inline
    RandomInstanceSpec random;
    std::uint64_t random_seed = 1;
    json initial;  // null keeps the builder's initial condition
};

struct SimulationConfig {
    int horizon = 300;
    int runs = 100;
};

struct SweepConfig {
    std::vector<int> num_users{5, 10, 20, 50, 100, 200};
    int runs = 200;
};

struct BaselineConfig {
    double min_win_rate = 0.95;
    bool write_trajectory = true;  // run 0 of the CRB policy
};

struct OnlineConfig {
    int epochs = 50;
    int epoch_length = 300;
    double epsilon0 = 1.0;
    Estimator estimator = Estimator::laplace;
    bool pool_arms = false;
    bool warm_start_lambda = true;
    int burn_in_epochs = 5;  // reference average starts here
    int final_epochs = 5;    // learner average over the last epochs
    long tv_min_visits = 10'000;
    double tv_threshold = 0.05;
    double reward_tolerance = 0.10;
    bool write_trace = true;
};

struct SandwichConfig {
    std::string source = "random";  // random | instance
    int instances = 10;
    RandomInstanceSpec random;
    int horizon = 4;
    int runs = 4000;
};

struct ActivationConfig {
    long samples = 10'000;
    long steady_burn_in = 10'000;
    long steady_samples = 1'000'000;
    double steady_tv_tolerance = 0.02;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
    InstanceConfig instance;
    DualOptions dual;
    SelectionOptions selection;
    SimulationConfig simulation;
    SweepConfig sweep;
    BaselineConfig baseline;
    OnlineConfig online;
    SandwichConfig sandwich;
    ActivationConfig activation;

    CrbInstance build_instance() const;
    /// Same instance with a different number of arms (demand_response and random builders).
    CrbInstance build_instance(int num_arms) const;
    LearnerOptions learner_options() const;
};

/// Parses an already profile-merged document.
ExperimentConfig parse_config(const json& doc);

/// Every field written out explicitly; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& cfg);

/// Reads `path`, applies profile `profile` ("desk" leaves the file as is;
/// any other name merge-patches doc["profiles"][name], and "paper" falls back
/// to N = 500 users and 500 runs when the file defines no such profile).
/// Instance files referenced by {"builder": "file", "path": ...} are resolved
/// relative to the config file and inlined.
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& profile = "desk");
ExperimentConfig load_config_json(json doc, const std::string& profile = "desk",
                                  const std::filesystem::path& base_dir = {});

/// FNV-1a over the compact dump of to_json(cfg), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace crb
