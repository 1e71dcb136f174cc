#pragma once

#include <cstdint>
#include <vector>

namespace escape4d {

/// Deterministic, portable PRNG (splitmix64 core). The standard <random>
/// distributions are implementation-defined, which would break bit-exact
/// reproducibility guarantees, so all randomness in the project goes
/// through this type.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double u01() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Uniform integer in [0, n), n > 0. Rejection-free modulo bias is
    /// negligible for the ranges used here but we reject anyway.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return u01() < p; }

    /// Standard normal via Box-Muller (polar form avoided to keep the
    /// draw count per call fixed at 2, which matters for stream splitting).
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derives an independent substream, e.g. one per permutation replicate,
    /// so replicates can be evaluated in any order (or in parallel) without
    /// changing results.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng mix(seed ^ (0x632BE59BD9B4E019ULL * (index + 1)));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

   private:
    std::uint64_t state_;
};

}  // namespace escape4d
