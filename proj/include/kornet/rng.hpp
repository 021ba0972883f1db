#pragma once

#include <cstdint>

namespace kornet {

// Counter-based generator: value k of stream s under seed is a pure function of
// (seed, s, k), so sample sets are prefixes of each other and order independent.
inline constexpr const char* rng_version = "splitmix64-counter-1";

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

// uniform in [0, 1) with 53 random bits
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return double(counter_bits(seed, stream, index) >> 11) * 0x1.0p-53;
}

}  // namespace kornet
