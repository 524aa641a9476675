#pragma once

#include <cstdint>
#include <random>

namespace pboel {

// splitmix64 step; used to derive independent substream seeds so that,
// e.g., label-gate draws never perturb the action-sampling stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_tag = 0) {
    return std::mt19937_64(mix_seed(seed, stream_tag));
}

// Uniform in [0, 1) with 53 random bits; stable across standard library versions.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace pboel
