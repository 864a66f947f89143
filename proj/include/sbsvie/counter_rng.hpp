#pragma once

#include <cmath>
#include <cstdint>

namespace sbsvie {

// Counter-based random stream: every draw is a pure function of
// (seed, c0, c1, c2), so path generation is reproducible independent of
// evaluation order. Mixing is the splitmix64 finalizer applied to the
// hashed coordinates; Gaussians come from Box-Muller on two derived lanes.
namespace rng {

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t c0, std::uint64_t c1,
                         std::uint64_t c2) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ (c0 + 0x9e3779b97f4a7c15ull));
    h = mix(h ^ (c1 + 0xbf58476d1ce4e5b9ull));
    h = mix(h ^ (c2 + 0x94d049bb133111ebull));
    return h;
}

// maps to the open interval (0, 1)
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline double uniform(std::uint64_t seed, std::uint64_t c0, std::uint64_t c1,
                      std::uint64_t c2) {
    return to_unit(key(seed, c0, c1, c2));
}

inline double gaussian(std::uint64_t seed, std::uint64_t c0, std::uint64_t c1,
                       std::uint64_t c2) {
    const std::uint64_t h = key(seed, c0, c1, c2);
    const double u1 = to_unit(h);
    const double u2 = to_unit(mix(h ^ 0xd1b54a32d192ed03ull));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace rng
} // namespace sbsvie
