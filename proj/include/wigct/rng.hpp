#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wigct {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Per-stage derived seeds: stages can be re-run independently yet reproducibly.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index = 0) {
    return splitmix64(splitmix64(root ^ fnv1a64(stage)) ^ index);
}

inline std::mt19937_64 named_stream(std::uint64_t root, std::string_view stage, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(root, stage, index));
}

} // namespace wigct
