#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace sparse_bandit {

/// Inverse-CDF categorical draw from a single uniform variate.
template <typename Gen>
std::size_t sample_categorical(std::span<const double> probs, Gen& rng) {
    if (probs.empty()) throw InvalidInput("sample_categorical: empty distribution");
    const double u = uniform01(rng);
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    return last_positive;
}

/// Distribution over ladder positions used by SparseLinUCB to draw I_t.
struct SelectionDistribution {
    enum class Kind { Uniform, Theory, KnownSparsity, Custom };

    std::vector<double> probs;
    Kind kind = Kind::Custom;
    double c_param = 1.0;             ///< Theory only
    std::size_t known_position = 0;   ///< KnownSparsity only

    std::size_t size() const noexcept { return probs.size(); }

    void validate() const {
        if (probs.empty()) throw InvalidInput("selection distribution: empty");
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("selection distribution: invalid entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("selection distribution: entries do not sum to 1");
    }

    static SelectionDistribution uniform(std::size_t n) {
        if (n == 0) throw InvalidInput("uniform distribution: n must be positive");
        return {std::vector<double>(n, 1.0 / static_cast<double>(n)), Kind::Uniform, 1.0, 0};
    }

    static SelectionDistribution point_mass(std::size_t n, std::size_t position) {
        if (position >= n) throw InvalidInput("point mass: position out of range");
        std::vector<double> p(n, 0.0);
        p[position] = 1.0;
        return {std::move(p), Kind::KnownSparsity, 1.0, position};
    }

    static SelectionDistribution custom(std::vector<double> probs) {
        SelectionDistribution d{std::move(probs), Kind::Custom, 1.0, 0};
        d.validate();
        return d;
    }
};

/// q_s = C^2 2^{-s} where that is below 1, and an equal share kappa of the
/// remaining mass elsewhere, for s = 1..n. The result is renormalized to sum
/// to exactly 1; entry s-1 holds q_s.
inline SelectionDistribution theory_distribution(double c_param, std::size_t n_levels) {
    if (!(c_param >= 1.0) || !std::isfinite(c_param)) throw InvalidInput("theory distribution: C must be >= 1");
    if (n_levels == 0) throw InvalidInput("theory distribution: n must be positive");
    std::vector<double> q(n_levels, 0.0);
    std::vector<bool> kappa_slot(n_levels, false);
    double kept = 0.0;
    std::size_t n_kappa = 0;
    for (std::size_t s = 1; s <= n_levels; ++s) {
        const double raw = std::ldexp(c_param * c_param, -static_cast<int>(s));
        if (raw < 1.0) {
            q[s - 1] = raw;
            kept += raw;
        } else {
            kappa_slot[s - 1] = true;
            ++n_kappa;
        }
    }
    if (n_kappa > 0) {
        const double kappa = std::max(0.0, 1.0 - kept) / static_cast<double>(n_kappa);
        for (std::size_t i = 0; i < n_levels; ++i)
            if (kappa_slot[i]) q[i] = kappa;
    }
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    if (!(total > 0.0)) throw InvalidInput("theory distribution: no mass");
    for (double& x : q) x /= total;
    return {std::move(q), SelectionDistribution::Kind::Theory, c_param, 0};
}

/// Draws a ladder position from `dist`.
template <typename Gen>
std::size_t sample_level(const SelectionDistribution& dist, Gen& rng) {
    return sample_categorical(std::span<const double>(dist.probs), rng);
}

/// Exp3 over ladder positions. `cumulative` holds S_{t,j}, the running sum of
/// negated importance-weighted losses.
struct Exp3State {
    enum class EtaMode {
        Fixed,        ///< constant learning rate `eta`
        TimeVarying,  ///< eta_t = 2 sqrt(log n / (n t))
    };

    std::vector<double> cumulative;
    std::vector<double> prior;  ///< weights q_s; uniform gives the plain softmax
    EtaMode eta_mode = EtaMode::TimeVarying;
    double eta = 0.0;
    double explore_q = 0.0;

    static Exp3State make(std::vector<double> prior, EtaMode mode, double eta, double explore_q) {
        if (prior.empty()) throw InvalidInput("exp3: empty prior");
        if (!(explore_q >= 0.0 && explore_q <= 1.0)) throw InvalidInput("exp3: explore_q must lie in [0, 1]");
        if (mode == EtaMode::Fixed && !(eta > 0.0 && std::isfinite(eta)))
            throw InvalidInput("exp3: fixed learning rate must be positive");
        for (double p : prior)
            if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("exp3: invalid prior entry");
        Exp3State s;
        s.cumulative.assign(prior.size(), 0.0);
        s.prior = std::move(prior);
        s.eta_mode = mode;
        s.eta = eta;
        s.explore_q = explore_q;
        return s;
    }

    std::size_t size() const noexcept { return cumulative.size(); }

    double learning_rate(std::uint64_t t) const {
        if (eta_mode == EtaMode::Fixed) return eta;
        if (t == 0) throw InvalidInput("exp3: round index starts at 1");
        const double n = static_cast<double>(size());
        return 2.0 * std::sqrt(std::log(n) / (n * static_cast<double>(t)));
    }
};

/// Learning rate sqrt(log n / (T n)) for the fixed-horizon analysis.
inline double exp3_theory_eta(std::size_t n_levels, std::uint64_t horizon) {
    const double n = static_cast<double>(n_levels);
    return std::sqrt(std::log(n) / (static_cast<double>(horizon) * n));
}

/// P_{t,j} proportional to prior_j exp(eta_t S_{t-1,j}), computed with the
/// maximum exponent subtracted.
inline std::vector<double> exp3_probs(const Exp3State& s, std::uint64_t t) {
    const std::size_t n = s.size();
    if (n == 0 || s.prior.size() != n) throw InvalidInput("exp3_probs: malformed state");
    const double eta = s.learning_rate(t);
    double max_exp = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(s.cumulative[j])) throw InvalidInput("exp3_probs: non-finite cumulative estimate");
        if (s.prior[j] > 0.0) max_exp = std::max(max_exp, eta * s.cumulative[j]);
    }
    if (max_exp == -std::numeric_limits<double>::infinity())
        throw InvalidInput("exp3_probs: prior has no mass");
    std::vector<double> p(n, 0.0);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (s.prior[j] <= 0.0) continue;
        p[j] = s.prior[j] * std::exp(eta * s.cumulative[j] - max_exp);
        z += p[j];
    }
    for (double& x : p) x /= z;
    return p;
}

/// Loss (2 - reward) / 4 clipped to [0, 1].
inline double exp3_loss(double reward) { return std::clamp((2.0 - reward) / 4.0, 0.0, 1.0); }

/// S_{t,chosen} -= loss / p_chosen; other entries unchanged.
inline void exp3_update(Exp3State& s, std::size_t chosen, double reward, double p_chosen) {
    if (!(p_chosen > 0.0)) throw InvalidInput("exp3_update: chosen probability must be positive");
    if (chosen >= s.size()) throw InvalidInput("exp3_update: chosen level out of range");
    if (!std::isfinite(reward)) throw InvalidInput("exp3_update: non-finite reward");
    const double loss = exp3_loss(reward);
    if (loss == 0.0) return;
    s.cumulative[chosen] -= loss / p_chosen;
}

}  // namespace sparse_bandit
