#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

// Seed plumbing. Every random choice in the pipeline flows from an explicit
// 64-bit seed mixed with stable identifiers (document id, variant id), so
// results are independent of thread schedule and iteration order.

namespace lacuna {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::string_view salt) {
    return mix_seed(base, fnv1a64(salt));
}

// Unbiased draw in [0, n). Hand-rolled so results do not depend on the
// standard library's distribution implementation.
inline std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rand_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace lacuna
