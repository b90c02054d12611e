#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "constants.hpp"

namespace satfringe {

// Deterministic sampling layer.  Every stochastic component draws through
// these helpers so that a (seed, block, salt) triple fully determines the
// byte stream regardless of platform or thread count; the standard library's
// distribution objects are implementation-defined and must not be used.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Collision-resistant (non-cryptographic) seed derivation for substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t block, std::uint64_t salt) {
    std::uint64_t s = seed;
    std::uint64_t x = splitmix64_next(s);
    s = x ^ block;
    x = splitmix64_next(s);
    s = x ^ salt;
    return splitmix64_next(s);
}

/// One RNG stream; substreams are derived, never split.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t block, std::uint64_t salt)
        : engine_(derive_seed(seed, block, salt)) {}

    /// Uniform in [0, 1), 53-bit mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one value per call; pairing is not
    /// cached so the draw count per event stays fixed).
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]: log argument never zero
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Exponential inter-arrival time with the given rate (1/s).
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    /// Number of Bernoulli(p) failures before the next success.  Lets the
    /// pulse loop jump directly between detections instead of testing every
    /// pulse (exact: the skip count of an i.i.d. Bernoulli sequence is
    /// geometric).
    std::uint64_t geometric_skip(double p) {
        if (p >= 1.0) return 0;
        if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
        const double u = uniform();
        const double k = std::floor(std::log1p(-u) / std::log1p(-p));
        if (k >= 9.2e18) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(k);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace satfringe
