#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace micmac {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based child seed: the same (root, counters...) always yields the same
/// stream, independent of the order in which streams are requested.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> counters) noexcept {
    std::uint64_t s = mix64(root);
    for (auto c : counters) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
    return s;
}

using Rng = std::mt19937_64;

}  // namespace micmac
