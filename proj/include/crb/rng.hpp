#pragma once

// Seeded random streams. Every stream is an mt19937_64 whose seed is derived
// by hashing (parent seed, index), so runs, arms and roles each get their own
// reproducible stream and coupled comparisons share context/transition noise.

#include <cstdint>
#include <random>
#include <span>

namespace crb {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of child stream `index` under `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Stream roles within one run.
inline constexpr std::uint64_t kContextStream = 0xC0;
inline constexpr std::uint64_t kPolicyStream = 0xB0;
inline constexpr std::uint64_t kArmStreamBase = 0x10000;

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    Rng child(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

    /// Uniform in [0,1) with 53 random bits (platform independent, unlike
    /// std::uniform_real_distribution).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // std::uniform_int_distribution is implementation-defined; reject instead.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Inverse-CDF draw from a probability row.
    int categorical(std::span<const double> probs) { return sample_inverse_cdf(probs, uniform()); }

    static int sample_inverse_cdf(std::span<const double> probs, double u) {
        double acc = 0.0;
        int last_positive = 0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            if (probs[k] <= 0.0) continue;
            last_positive = static_cast<int>(k);
            acc += probs[k];
            if (u < acc) return static_cast<int>(k);
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace crb
