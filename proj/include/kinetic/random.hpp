#pragma once

#include <cstdint>
#include <random>

namespace kinetic {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent generator for a (seed, a, b) triple. Streams depend only on
// the triple, never on thread count or call order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    return std::mt19937_64(splitmix64(seed ^ splitmix64(a ^ splitmix64(b))));
}

// Uniform on [0, 1) with 53 random bits.
inline double u01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace kinetic
