#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace assl {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

constexpr std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = kFnvOffset) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// Independent RNG stream keyed by (seed, name). Streams with different names
// never share state, so adding a consumer of one stream does not perturb another.
inline Rng make_stream(std::uint64_t seed, std::string_view name) {
    std::uint64_t z = seed ^ fnv1a(name);
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(z);
}

}  // namespace assl
