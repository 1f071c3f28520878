#pragma once

// Seeded generator for everything randomized (probes, test functions, random
// diffeos). splitmix64 keeps streams identical across platforms and standard
// libraries, which the byte-identical-artifacts guarantee relies on.

#include <cstdint>

namespace muflow {

struct Rng {
    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform over {-1, +1} times uniform magnitude in [lo, hi].
    double signed_uniform(double lo, double hi) {
        double s = (next_u64() & 1u) ? 1.0 : -1.0;
        return s * uniform(lo, hi);
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    std::uint64_t state;
};

} // namespace muflow
