#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace tlo {

using Rng = std::mt19937_64;

// Portable draws: the same seed gives the same stream on every standard library.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do r = rng();
    while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Decorrelated stream for a (seed, stream) pair.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

}  // namespace tlo
