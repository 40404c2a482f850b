#pragma once

#include <cstdint>

#include "spinlab/vec3.hpp"

namespace spinlab {

/// Counter-based SplitMix64 stream. Every draw is a pure function of
/// (seed, stream, counter), so randomized checks replay exactly from the
/// config seed regardless of call order elsewhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(seed ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL)) {}

    std::uint64_t next_u64() {
        std::uint64_t z = base_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (two draws per call, deterministic).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-60));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    Vec3 normal_vec3() { return {normal(), normal(), normal()}; }

    Vec3 unit_vec3() {
        for (;;) {
            const Vec3 v = normal_vec3();
            const double n = norm(v);
            if (n > 1e-6) return (1.0 / n) * v;
        }
    }

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace spinlab
