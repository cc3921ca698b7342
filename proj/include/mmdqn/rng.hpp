#pragma once

#include <cstdint>
#include <random>

namespace mmdqn {

// Thin mt19937 wrapper with explicit conversions so that every draw is a
// fixed number of engine calls. std::uniform_*_distribution consumes a
// library-dependent number of calls; these don't.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(static_cast<uint32_t>(seed ^ (seed >> 32))) {}

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(engine_()) * (1.0 / 4294967296.0);
    }

    // Uniform integer in [0, n), n > 0. Rejection keeps it unbiased.
    uint32_t next_below(uint32_t n) {
        const uint32_t limit = UINT32_MAX - (UINT32_MAX % n);
        uint32_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // Uniform in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    std::mt19937& engine() { return engine_; }

private:
    std::mt19937 engine_;
};

// Derives a decorrelated child seed for a named stream (splitmix64 step).
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mmdqn
