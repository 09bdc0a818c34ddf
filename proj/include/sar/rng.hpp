#pragma once

#include <cmath>
#include <cstdint>

namespace sar {

// Deterministic PRNG (splitmix64) with explicit distributions; identical
// seeds give identical streams on every platform, which <random>'s
// distributions do not guarantee. Each simulation subsystem gets its own
// stream forked from the master seed, so reconfiguring one noise source
// cannot shift another.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; always consumes exactly two raw draws.
    double normal(double mean = 0.0, double sigma = 1.0) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(kTwoPi_ * u2);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Child stream derived from this stream's original seed (not its current
    // state), so forks are stable no matter how many draws happened first.
    RngStream fork(std::uint64_t salt) const {
        std::uint64_t z = seed_ ^ (0xD1B54A32D192ED03ull * (salt + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return RngStream(z ^ (z >> 31));
    }

    std::uint64_t seed() const { return seed_; }

private:
    static constexpr double kTwoPi_ = 6.28318530717958647692;
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace sar
