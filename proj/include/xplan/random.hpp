#pragma once

#include <cstdint>
#include <random>

namespace xplan {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30u)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27u)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31u);
}

// Uniform double in [0, 1) from the top 53 bits; unlike the standard
// distributions this is identical across standard library implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11u) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace xplan
