#pragma once

#include <cstdint>
#include <random>

namespace gde {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-stream engine derived from (seed, a, b, c). Parallel
/// consumers each own a stream, so scheduling never changes results.
inline std::mt19937_64 derive_rng(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t state = seed;
    splitmix64(state);
    state ^= 0x6a09e667f3bcc909ULL + a;
    splitmix64(state);
    state ^= 0xbb67ae8584caa73bULL + b;
    splitmix64(state);
    state ^= 0x3c6ef372fe94f82bULL + c;
    return std::mt19937_64(splitmix64(state));
}

}  // namespace gde
