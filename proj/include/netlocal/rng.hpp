#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace netlocal {

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stable derivation of independent stream seeds from (master, index).
// Restart r of a fit, or point i of a sweep, owns the stream derived from
// its own index, so results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master;
    (void)splitmix64_step(state);
    state ^= 0x9E3779B97F4A7C15ull * (index + 1);
    std::uint64_t z = splitmix64_step(state);
    (void)splitmix64_step(state);
    return z ^ splitmix64_step(state);
}

// Uniform double in (0, 1], from the top 53 bits. mt19937_64 output is
// fully specified by the standard, so streams are portable.
inline double uniform_01(std::mt19937_64& eng) {
    return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

inline double exponential_1(std::mt19937_64& eng) {
    return -std::log(uniform_01(eng));
}

}  // namespace netlocal
