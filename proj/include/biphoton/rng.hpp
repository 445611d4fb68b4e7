#pragma once

#include <cstdint>
#include <random>

namespace biphoton {

/// SplitMix64 step; used to decorrelate seed material.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic independent stream for (seed, index): parallel consumers
/// (bootstrap resamples, multi-starts) each get their own generator so that
/// results do not depend on scheduling or thread count.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (index + 1);
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace biphoton
