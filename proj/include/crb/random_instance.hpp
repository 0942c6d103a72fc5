#pragma once

#include <cstdint>

#include "crb/model.hpp"

namespace crb {

struct RandomInstanceSpec {
    int num_arms = 2;
    int num_contexts = 2;
    int num_states = 2;
    int budget = 1;  // same C for every context
    double discount = 0.9;
    double reward_max = 1.0;  // rewards ~ Unif[0, reward_max)
    bool homogeneous = false;
};

/// Dense random rows (normalized uniform weights), uniform initial condition.
CrbInstance random_instance(const RandomInstanceSpec& spec, std::uint64_t seed);

/// Random arm with dense rows, rewards in [0, reward_max).
ArmModel random_arm(int num_contexts, int num_states, double reward_max, std::uint64_t seed);

/// Random context chain with dense rows and the given budgets.
ContextChain random_chain(int num_contexts, std::vector<int> budgets, std::uint64_t seed);

}  // namespace crb
