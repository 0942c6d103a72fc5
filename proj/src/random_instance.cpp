#include "crb/random_instance.hpp"

#include <stdexcept>

#include "crb/rng.hpp"

namespace crb {

namespace {

void fill_row(Rng& rng, std::span<double> row) {
    double total = 0.0;
    for (auto& p : row) total += (p = rng.uniform() + 1e-3);
    for (auto& p : row) p /= total;
}

}  // namespace

ArmModel random_arm(int num_contexts, int num_states, double reward_max, std::uint64_t seed) {
    Rng rng(seed);
    ArmModel arm(num_contexts, num_states);
    for (int g = 0; g < num_contexts; ++g)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < kNumActions; ++a) {
                const auto act = static_cast<Action>(a);
                arm.reward(g, s, act) = reward_max * rng.uniform();
                fill_row(rng, arm.row(g, s, act));
            }
    return arm;
}

ContextChain random_chain(int num_contexts, std::vector<int> budgets, std::uint64_t seed) {
    Rng rng(seed);
    ContextChain chain;
    chain.num_contexts = num_contexts;
    chain.transition.assign(static_cast<std::size_t>(num_contexts) * num_contexts, 0.0);
    for (int g = 0; g < num_contexts; ++g)
        fill_row(rng, {chain.transition.data() + static_cast<std::size_t>(g) * num_contexts,
                       static_cast<std::size_t>(num_contexts)});
    chain.budgets = std::move(budgets);
    return chain;
}

CrbInstance random_instance(const RandomInstanceSpec& spec, std::uint64_t seed) {
    if (spec.num_arms < 1 || spec.num_contexts < 1 || spec.num_states < 1)
        throw std::invalid_argument("random_instance: sizes must be positive");
    CrbInstance inst;
    inst.chain = random_chain(spec.num_contexts, std::vector<int>(static_cast<std::size_t>(spec.num_contexts), spec.budget),
                              derive_seed(seed, 0));
    inst.discount = spec.discount;
    inst.homogeneous = spec.homogeneous;
    for (int i = 0; i < spec.num_arms; ++i) {
        const std::uint64_t arm_seed = derive_seed(seed, spec.homogeneous ? 1 : 1 + static_cast<std::uint64_t>(i));
        inst.arms.push_back(random_arm(spec.num_contexts, spec.num_states, spec.reward_max, arm_seed));
    }
    inst.initial = InitialDistribution::uniform(spec.num_contexts, spec.num_states);
    return inst;
}

}  // namespace crb
