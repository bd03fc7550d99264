#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cfn {

// SplitMix64 finalizer, used to derive independent sub-seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Thin RNG wrapper. The draw transforms are spelled out here instead of using
// std::*_distribution so trajectories are bit-identical across standard
// library implementations (the reproducibility contract covers the stream,
// not just the engine).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi]
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // exponential with the given rate, strictly positive almost surely
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    // uniform integer in [lo, hi], for test scenario generation
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(u01() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

} // namespace cfn
