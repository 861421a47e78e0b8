#pragma once

#include <cmath>
#include <cstdint>

namespace mfbs {

// Counter-based random streams. Every variate is a pure function of
// (seed, stream fields, counter), so parallel generation is order-independent
// and replay is exact.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Collapses a list of stream fields into a single 64-bit key.
inline std::uint64_t stream_key(std::uint64_t seed) { return splitmix64(seed); }

template <class... Rest>
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t field, Rest... rest) {
    return stream_key(splitmix64(seed ^ splitmix64(field + 0x632be59bd9b4e019ULL)), rest...);
}

/// Uniform in (0, 1]: never returns 0, so log(u) is always finite.
inline double uniform_01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal variate addressed by a stream key (Box-Muller).
inline double standard_normal(std::uint64_t key) {
    const double u1 = uniform_01(splitmix64(key));
    const double u2 = uniform_01(splitmix64(key ^ 0x4cf5ad432745937fULL));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

template <class... Fields>
inline double standard_normal_at(std::uint64_t seed, Fields... fields) {
    return standard_normal(stream_key(seed, static_cast<std::uint64_t>(fields)...));
}

/// Uniform in [0,1) addressed by a stream key.
template <class... Fields>
inline double uniform_at(std::uint64_t seed, Fields... fields) {
    return (static_cast<double>(stream_key(seed, static_cast<std::uint64_t>(fields)...) >> 11)) * 0x1.0p-53;
}

/// Derives a child seed (e.g. one seed per ensemble replicate).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return stream_key(seed, index, 0x7262656eULL);
}

}  // namespace mfbs
