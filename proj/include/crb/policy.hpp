#pragma once

#include <span>
#include <string>

#include "crb/model.hpp"
#include "crb/rng.hpp"

namespace crb {

/// A joint policy maps (g, per-arm states) to per-arm actions. Implementations
/// must keep sum(actions) <= C_g. The Rng is a per-run stream reserved for the
/// policy, so randomized policies do not disturb environment noise.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void decide(ContextId g, std::span<const StateId> states, Rng& rng, std::span<Action> out) const = 0;
    virtual std::string name() const = 0;
};

class PassivePolicy final : public Policy {
public:
    void decide(ContextId, std::span<const StateId>, Rng&, std::span<Action> out) const override {
        for (auto& a : out) a = 0;
    }
    std::string name() const override { return "passive"; }
};

}  // namespace crb
