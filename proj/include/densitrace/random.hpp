#pragma once

#include <cstdint>
#include <random>

namespace densitrace {

/// Seeded generator with portable derivations: the same seed gives the same
/// stream on every standard library (std distributions are not used).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0; rejection sampling removes modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// Independent child stream, e.g. one per permutation batch or corpus line.
    Rng split(std::uint64_t stream) const {
        std::uint64_t z = seed_mix(engine_) + 0x9E3779B97F4A7C15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

private:
    static std::uint64_t seed_mix(std::mt19937_64 copy) { return copy(); }

    std::mt19937_64 engine_;
};

}  // namespace densitrace
