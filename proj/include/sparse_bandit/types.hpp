#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace sparse_bandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Action sets are stored column-wise: one action per column, d rows.
using ActionSet = Eigen::MatrixXd;

using Rng = std::mt19937_64;

/// Slack allowed on unit-norm preconditions.
inline constexpr double kNormSlack = 1e-9;

/// Scores closer than this are treated as tied; the lowest index wins.
inline constexpr double kTieTolerance = 1e-12;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based split of a base seed. Each (base, counters...) tuple yields an
/// independent stream seed, so the stream a consumer receives depends only on
/// its own coordinates and never on how many other streams were drawn.
template <typename... Counters>
constexpr std::uint64_t derive_seed(std::uint64_t base, Counters... counters) noexcept {
    std::uint64_t s = mix64(base);
    ((s = mix64(s ^ mix64(static_cast<std::uint64_t>(counters) + 0x632be59bd9b4e019ULL))), ...);
    return s;
}

/// FNV-1a, used to key per-policy streams by label.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename Gen>
double uniform01(Gen& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace sparse_bandit
