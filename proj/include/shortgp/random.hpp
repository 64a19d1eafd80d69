#pragma once

// Counter-based random numbers: every draw is a pure function of a key tuple,
// so any replicate, restart or point can be regenerated in isolation and
// results do not depend on evaluation order or thread count.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace shortgp::random {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hashes an ordered tuple of integers into one 64-bit key.
constexpr std::uint64_t key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts) h = mix(h ^ mix(p));
    return h;
}

/// FNV-1a, for deriving keys from series identifiers.
constexpr std::uint64_t hash_string(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform double in the open interval (0, 1).
double uniform(std::uint64_t key);

/// Standard normal draw (Box-Muller on two derived uniforms).
double normal(std::uint64_t key);

/// exp(uniform(log lo, log hi)).
double log_uniform(std::uint64_t key, double lo, double hi);

}  // namespace shortgp::random
