// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace thzjcs {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLightSpeed = 2.99792458e8;  // overridden by config where needed

// Vehicles closer than this are treated as co-located and rejected; the free
// space loss diverges at d -> 0.
inline constexpr double kMinDistance = 0.1;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Planar angle between two direction vectors, in [0, pi].
inline double angle_between(const Vec2& a, const Vec2& b) {
    return std::atan2(std::fabs(cross(a, b)), dot(a, b));
}

// dB / dBm conversions. All internal computation is in linear SI units;
// decibel values appear only at the configuration boundary and in exports.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Deterministic RNG helpers. std::mt19937_64 has a standard-specified output
// sequence, but the std distributions do not, so uniform draws are derived
// from raw engine output to keep results reproducible across toolchains.
using Rng = std::mt19937_64;

inline double uniform_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_double(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(rng);
}

// Unbiased integer in [0, n) via masked rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    std::uint64_t mask = n - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    for (;;) {
        const std::uint64_t v = rng() & mask;
        if (v < n) return v;
    }
}

// First k entries of a uniform random permutation of {0,...,n-1}
// (partial Fisher-Yates), without replacement.
inline std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    const std::size_t m = std::min(n, k);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

// FNV-1a, used for config hashes and seed derivation.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose, std::uint64_t index) {
    std::uint64_t h = fnv1a(purpose);
    h ^= master;
    h *= 1099511628211ull;
    h ^= index;
    h *= 1099511628211ull;
    // splitmix64 finalizer to decorrelate nearby indices
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

}  // namespace thzjcs
