#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ifl {

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Seed of stream `stream` under `purpose`, derived from a master seed.
 *
 * split(master, purpose, stream) depends only on its three arguments, so a
 * draw or chain can be reproduced in isolation regardless of how many other
 * streams were consumed or in which order.
 */
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t purpose,
                                   std::uint64_t stream) noexcept
{
    return mix64(mix64(master ^ mix64(purpose)) + stream);
}

enum : std::uint64_t {
    stream_disorder = 1,
    stream_chain = 2,
};

/**
 * mt19937_64 with the few derived draws the library needs. The conversions are
 * written out rather than taken from <random> distributions, whose output is
 * implementation-defined, so sample streams match across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Box-Muller (one variate per call).
    double normal()
    {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ifl
