#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace sparse_bandit {

enum class LadderMode {
    FixedHorizon,   ///< alpha_i = 2^i log T
    TimeDependent,  ///< alpha_{i,t} = 2^i log t
};

/// Geometric schedule of squared confidence radii.
///
/// Levels carry their exponent directly: level i has radius 2^i log T (or
/// 2^i log t). Without the greedy level the ladder spans levels 1..n; with it
/// the ladder spans 0..n-1 and level 0 has radius 0 (greedy play). Selection
/// distributions are indexed by position 0..n-1, see level_at().
class RadiusLadder {
public:
    RadiusLadder(LadderMode mode, std::size_t n_levels, std::uint64_t horizon, bool include_greedy_level)
        : mode_(mode), n_levels_(n_levels), horizon_(horizon), greedy_(include_greedy_level) {
        if (n_levels == 0) throw InvalidInput("ladder: n_levels must be positive");
        if (horizon == 0) throw InvalidInput("ladder: horizon must be positive");
        if (n_levels > 60) throw InvalidInput("ladder: n_levels too large");
    }

    /// Levels 1..n with alpha_i = 2^i log T.
    static RadiusLadder fixed_horizon(std::size_t n_levels, std::uint64_t horizon) {
        return {LadderMode::FixedHorizon, n_levels, horizon, false};
    }

    /// The experimental ladder: level 0 greedy, then alpha_{i,t} = 2^i log t for i = 1..n-1.
    static RadiusLadder time_dependent(std::size_t n_levels, std::uint64_t horizon) {
        return {LadderMode::TimeDependent, n_levels, horizon, true};
    }

    LadderMode mode() const noexcept { return mode_; }
    std::size_t n_levels() const noexcept { return n_levels_; }
    std::uint64_t horizon() const noexcept { return horizon_; }
    bool include_greedy_level() const noexcept { return greedy_; }

    std::size_t first_level() const noexcept { return greedy_ ? 0 : 1; }
    std::size_t top_level() const noexcept { return first_level() + n_levels_ - 1; }
    std::size_t level_at(std::size_t position) const {
        if (position >= n_levels_) throw InvalidInput("ladder: position out of range");
        return first_level() + position;
    }
    std::size_t position_of(std::size_t level) const {
        check_level(level);
        return level - first_level();
    }

    /// Squared radius of `level` at round t (t >= 1).
    double radius(std::size_t level, std::uint64_t t) const {
        check_level(level);
        if (t == 0) throw InvalidInput("ladder: round index starts at 1");
        if (greedy_ && level == 0) return 0.0;
        const double lg = mode_ == LadderMode::FixedHorizon ? std::log(static_cast<double>(horizon_))
                                                            : std::log(static_cast<double>(t));
        return std::ldexp(lg, static_cast<int>(level));
    }

    double top_radius(std::uint64_t t) const { return radius(top_level(), t); }

private:
    void check_level(std::size_t level) const {
        if (level < first_level() || level > top_level())
            throw InvalidInput("ladder: level " + std::to_string(level) + " outside [" +
                               std::to_string(first_level()) + ", " + std::to_string(top_level()) + "]");
    }

    LadderMode mode_;
    std::size_t n_levels_;
    std::uint64_t horizon_;
    bool greedy_;
};

struct ConversionParams {
    double b_t = 0.0;          ///< regret bound B_T of the online regressor
    double delta = 0.25;       ///< failure probability, in (0, 1/4]
    double c_universal = 1.0;  ///< constant of the sparse-regression bound
    std::uint64_t t_horizon = 1;
};

/// Squared radius of the online-to-confidence-set conversion:
/// 2 + 2 B + 32 log((sqrt 8 + sqrt(1 + B)) / delta).
inline double gamma_delta(const ConversionParams& p) {
    if (!(p.delta > 0.0 && p.delta <= 0.25))
        throw InvalidInput("gamma_delta: delta must lie in (0, 1/4]");
    if (!(p.b_t >= 0.0) || !std::isfinite(p.b_t))
        throw InvalidInput("gamma_delta: regret bound must be finite and nonnegative");
    return 2.0 + 2.0 * p.b_t + 32.0 * std::log((std::sqrt(8.0) + std::sqrt(1.0 + p.b_t)) / p.delta);
}

/// Sparse online regression regret bound
/// c l0 { log(e + sqrt T) + C_T log(1 + l1 / l0) },  C_T = 2 + log2 log(e + sqrt T),
/// with l0 = ||theta||_0 and l1 = ||theta||_1.
inline double seqsew_regret_bound(std::uint64_t l0, double l1, std::uint64_t t_horizon, double c_universal = 1.0) {
    if (l0 == 0) throw InvalidInput("seqsew_regret_bound: l0 must be at least 1");
    if (!(l1 >= 0.0) || !std::isfinite(l1)) throw InvalidInput("seqsew_regret_bound: l1 must be finite and nonnegative");
    if (t_horizon == 0) throw InvalidInput("seqsew_regret_bound: horizon must be positive");
    if (!(c_universal > 0.0)) throw InvalidInput("seqsew_regret_bound: constant must be positive");
    const double k = static_cast<double>(l0);
    const double base = std::log(std::numbers::e + std::sqrt(static_cast<double>(t_horizon)));
    const double c_t = 2.0 + std::log2(base);
    return c_universal * k * (base + c_t * std::log1p(l1 / k));
}

/// Least level whose radius dominates `gamma` (inclusive). FixedHorizon ladders only.
inline std::size_t safe_index(const RadiusLadder& ladder, double gamma) {
    if (ladder.mode() != LadderMode::FixedHorizon)
        throw InvalidInput("safe_index: defined for fixed-horizon ladders only");
    if (!std::isfinite(gamma)) throw InvalidInput("safe_index: gamma must be finite");
    const std::uint64_t horizon = ladder.horizon();
    for (std::size_t level = ladder.first_level(); level <= ladder.top_level(); ++level)
        if (gamma <= ladder.radius(level, horizon)) return level;
    throw LadderTooShort("safe_index: gamma " + std::to_string(gamma) + " exceeds top radius " +
                         std::to_string(ladder.top_radius(horizon)));
}

/// Ladder size max(ceil(log2 d) + 3, least n with 2^n log T >= gamma).
inline std::size_t auto_ladder_size(std::size_t dim, std::uint64_t horizon, double gamma) {
    if (dim == 0) throw InvalidInput("auto_ladder_size: dimension must be positive");
    if (horizon < 2) throw InvalidInput("auto_ladder_size: horizon must be at least 2");
    const double lg = std::log(static_cast<double>(horizon));
    std::size_t n = 1;
    while (std::ldexp(lg, static_cast<int>(n)) < gamma) {
        if (++n > 60) throw LadderTooShort("auto_ladder_size: gamma unreachable");
    }
    std::size_t by_dim = 3;
    while ((std::size_t{1} << (by_dim - 3)) < dim) ++by_dim;
    return std::max(n, by_dim);
}

/// Least level i >= 1 with 2^i >= sparsity, i.e. alpha_i >= S log T. This is the
/// level a sparsity-aware learner picks when it knows S but not the constant of
/// the regression bound.
inline std::size_t sparsity_scaled_level(const RadiusLadder& ladder, std::size_t sparsity) {
    if (sparsity == 0) throw InvalidInput("sparsity_scaled_level: sparsity must be positive");
    std::size_t level = std::max<std::size_t>(1, ladder.first_level());
    while ((std::uint64_t{1} << level) < sparsity) ++level;
    if (level > ladder.top_level())
        throw LadderTooShort("sparsity_scaled_level: ladder too short for sparsity " + std::to_string(sparsity));
    return level;
}

}  // namespace sparse_bandit
