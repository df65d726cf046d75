#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace orf {

// Deterministic RNG with fully specified distributions. std::*_distribution
// output is implementation-defined, so uniform and gaussian draws are built
// directly on the mt19937_64 bit stream to keep scenarios bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in (0, 1].
    double uniform01() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant at
    // the ranges used here but rejection sampling keeps it exact anyway.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return lo + static_cast<std::int64_t>(v % span);
    }

    // Standard normal via Box-Muller; two uniforms per draw, no cached state.
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace orf
