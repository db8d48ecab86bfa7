#pragma once

#include <cstdint>
#include <random>

namespace hyperdyn {

/// Seeded generator with distribution code written out by hand, so that the
/// same seed yields the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    static std::uint64_t seed_mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

/// Stream for (seed, key) pairs; used wherever per-sample streams must not
/// depend on evaluation order.
inline Rng keyed_rng(std::uint64_t seed, std::uint64_t key) {
    return Rng(Rng::seed_mix(seed ^ Rng::seed_mix(key + 0x9e3779b97f4a7c15ULL)));
}

}  // namespace hyperdyn
