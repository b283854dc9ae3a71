#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "pctf3d/types.hpp"

namespace pctf3d {

/// Seeded random source with platform-independent draws.
///
/// All randomized operations in the library go through this wrapper so that
/// a given seed produces bit-identical results regardless of the standard
/// library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased uniform integer in [0, n). Rejection sampling keeps the draw
    /// exactly uniform.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) {
            throw std::invalid_argument("uniform_int: n must be positive");
        }
        std::uint64_t x, r;
        do {
            x = gen_();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    /// Index drawn from the categorical distribution given by `probs`
    /// (nonnegative, summing to ~1). The final index absorbs any rounding
    /// leftover.
    int categorical(const Vector& probs) {
        const double u = uniform01();
        double acc = 0.0;
        const Index n = probs.size();
        for (Index i = 0; i < n; ++i) {
            acc += probs[i];
            if (u < acc) {
                return static_cast<int>(i);
            }
        }
        return static_cast<int>(n - 1);
    }

  private:
    std::mt19937_64 gen_;
};

/// Deterministically derives an independent stream seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace pctf3d
