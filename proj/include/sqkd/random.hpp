#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sqkd {

using Rng = std::mt19937_64;

/// Avalanching mix used to derive independent seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

/// Deterministic sub-stream: stream index k of a master seed.
inline Rng derive_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(master) ^ splitmix64(stream)));
}

/// Uniform in [0, 1), 53-bit resolution, identical on every platform.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in (0, 1]; safe as a log() argument.
inline double uniform01_open(Rng& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (two uniforms per draw, no cached spare,
/// so the stream position is independent of call history).
inline double normal01(Rng& rng) {
    const double u = uniform01_open(rng);
    const double v = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

/// Uniform integer in [0, n). Rejection-free multiply-shift would bias at
/// astronomical n only; n here is always small (bin counts, round counts).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace sqkd
