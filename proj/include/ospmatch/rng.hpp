#pragma once

#include <cstdint>
#include <vector>

namespace ospmatch {

// Splittable counter-seeded generator. Every draw sequence is a pure function
// of the seed, so serial and parallel sweeps produce identical results.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). Modulo bias is irrelevant at these sizes;
    // portability of the sequence is what matters.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

// Generator for one trial of a seeded experiment, independent of trial order.
inline SplitMix64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    SplitMix64 mix(seed ^ (0xA0761D6478BD642Full * (trial + 1)));
    mix.next();
    return mix;
}

// Fisher-Yates with the portable generator (std::shuffle is
// implementation-defined and would not reproduce across platforms).
template <typename T>
void shuffle_deterministic(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace ospmatch
