#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qa2sat {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_str(std::string_view s) {
    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic stream derivation: every consumer of randomness seeds its
// own engine from (master seed, stage name, a couple of integer ids).
// Streams for different tuples are independent for all practical purposes,
// and results never depend on scheduling or worker count.
inline Rng make_rng(std::uint64_t master, std::string_view stage,
                    std::uint64_t id0 = 0, std::uint64_t id1 = 0) {
    std::uint64_t h = mix64(master ^ hash_str(stage));
    h = mix64(h ^ id0);
    h = mix64(h ^ id1);
    return Rng(h);
}

}  // namespace qa2sat
