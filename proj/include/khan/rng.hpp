#pragma once

#include <cstdint>
#include <random>

namespace khan {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream i derived from a base seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t i);

/// mt19937_64 with hand-written distributions, so draws do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform on {0, ..., n-1}; n > 0.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Marsaglia polar method.
    double normal();
    bool bernoulli(double p) { return uniform() < p; }
    int sign() { return (engine_() >> 63) ? 1 : -1; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace khan
