#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace sparse_bandit {

struct NoiseModel {
    enum class Kind { UniformPm1, Gaussian, None };

    Kind kind = Kind::UniformPm1;
    double sigma = 1.0;  ///< Gaussian only

    static NoiseModel uniform() { return {Kind::UniformPm1, 1.0}; }
    static NoiseModel gaussian(double sigma) {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("gaussian noise: sigma must be >= 0");
        return {Kind::Gaussian, sigma};
    }
    static NoiseModel none() { return {Kind::None, 0.0}; }

    /// Draws one noise value. UniformPm1 and None consume exactly one
    /// generator call, so switching between them keeps streams aligned.
    template <typename Gen>
    double sample(Gen& rng) const {
        switch (kind) {
            case Kind::UniformPm1:
                return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
            case Kind::Gaussian:
                return std::normal_distribution<double>(0.0, sigma)(rng);
            case Kind::None:
                rng.discard(1);
                return 0.0;
        }
        return 0.0;
    }

    bool operator==(const NoiseModel&) const = default;
};

/// One completed round as seen by an adaptive adversary.
struct RoundRecord {
    std::shared_ptr<const ActionSet> actions;
    std::size_t chosen = 0;
    double reward = 0.0;
};

using Transcript = std::vector<RoundRecord>;

/// Emits the action set of each round. Implementations may inspect the full
/// observable transcript of past sets, chosen actions and rewards.
class ActionSetProvider {
public:
    virtual ~ActionSetProvider() = default;
    virtual std::shared_ptr<const ActionSet> next_set(const Transcript& history) = 0;

    /// The set used every round, when the provider is round-independent.
    virtual std::shared_ptr<const ActionSet> fixed_set() const { return nullptr; }

    /// Fresh provider with the same configuration, for a new episode.
    virtual std::unique_ptr<ActionSetProvider> clone() const = 0;
};

class FixedActionSetProvider final : public ActionSetProvider {
public:
    explicit FixedActionSetProvider(ActionSet actions)
        : actions_(std::make_shared<const ActionSet>(std::move(actions))) {
        if (actions_->cols() == 0) throw InvalidInput("fixed provider: empty action set");
    }
    std::shared_ptr<const ActionSet> next_set(const Transcript&) override { return actions_; }
    std::shared_ptr<const ActionSet> fixed_set() const override { return actions_; }
    std::unique_ptr<ActionSetProvider> clone() const override {
        return std::make_unique<FixedActionSetProvider>(*this);
    }

private:
    std::shared_ptr<const ActionSet> actions_;
};

/// Uniform draw from the unit sphere in R^dim via normalized standard normals.
template <typename Gen>
Vector sample_unit_sphere(std::size_t dim, Gen& rng) {
    if (dim == 0) throw InvalidInput("sample_unit_sphere: dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    double norm = 0.0;
    do {
        for (std::size_t i = 0; i < dim; ++i) v[i] = normal(rng);
        norm = v.norm();
    } while (!(norm > 0.0));
    return v / norm;
}

class BanditInstance {
public:
    BanditInstance(Vector theta_star, std::unique_ptr<ActionSetProvider> provider, NoiseModel noise)
        : theta_(std::move(theta_star)), provider_(std::move(provider)), noise_(noise) {
        if (theta_.size() == 0) throw InvalidInput("bandit instance: empty target");
        if (!all_finite(theta_) || theta_.norm() > 1.0 + 1e-12) throw InvalidInput("bandit instance: ||theta*|| > 1");
        if (!provider_) throw InvalidInput("bandit instance: missing action-set provider");
    }

    BanditInstance(const BanditInstance& other)
        : theta_(other.theta_), provider_(other.provider_->clone()), noise_(other.noise_) {}
    BanditInstance& operator=(const BanditInstance& other) {
        if (this != &other) {
            theta_ = other.theta_;
            provider_ = other.provider_->clone();
            noise_ = other.noise_;
        }
        return *this;
    }
    BanditInstance(BanditInstance&&) noexcept = default;
    BanditInstance& operator=(BanditInstance&&) noexcept = default;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(theta_.size()); }
    const Vector& theta_star() const noexcept { return theta_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    ActionSetProvider& provider() noexcept { return *provider_; }
    const ActionSetProvider& provider() const noexcept { return *provider_; }

    std::size_t sparsity() const {
        return static_cast<std::size_t>((theta_.array() != 0.0).count());
    }

    /// Next action set, checked against the norm contract.
    std::shared_ptr<const ActionSet> next_set(const Transcript& history) {
        auto set = provider_->next_set(history);
        if (!set || set->cols() == 0) throw InvalidInput("provider returned an empty action set");
        if (static_cast<std::size_t>(set->rows()) != dim()) throw InvalidInput("provider returned wrong dimension");
        for (Eigen::Index k = 0; k < set->cols(); ++k)
            if (!set->col(k).allFinite() || set->col(k).norm() > 1.0 + 1e-12)
                throw InvalidInput("provider returned an action with norm above 1");
        return set;
    }

    double expected_reward(const Vector& a) const { return a.dot(theta_); }

    /// X = <a, theta*> + noise.
    template <typename Gen>
    double reward(const Vector& a, Gen& rng) const {
        const double mean = expected_reward(a);
        return mean + noise_.sample(rng);
    }

    /// max_{b in set} <b, theta*> - <chosen, theta*>, clamped at 0.
    double instantaneous_regret(const ActionSet& set, std::size_t chosen) const {
        if (chosen >= static_cast<std::size_t>(set.cols())) throw InvalidInput("instantaneous_regret: index out of range");
        const Vector values = set.transpose() * theta_;
        const double r = values.maxCoeff() - values[static_cast<Eigen::Index>(chosen)];
        return std::max(0.0, r);
    }

    double instantaneous_regret(const ActionSet& set, const Vector& chosen) const {
        for (Eigen::Index k = 0; k < set.cols(); ++k)
            if (set.col(k) == chosen) return instantaneous_regret(set, static_cast<std::size_t>(k));
        throw InvalidInput("instantaneous_regret: chosen action is not in the set");
    }

private:
    Vector theta_;
    std::unique_ptr<ActionSetProvider> provider_;
    NoiseModel noise_;
};

/// K actions drawn i.i.d. from the unit sphere, shared by all rounds; theta*
/// has its first S coordinates drawn from the unit sphere in R^S, the rest zero.
template <typename Gen>
BanditInstance generate_fixed_sphere_instance(std::size_t dim, std::size_t k_actions, std::size_t sparsity, Gen& rng,
                                              NoiseModel noise = NoiseModel::uniform()) {
    if (dim == 0) throw InvalidInput("instance: dimension must be positive");
    if (k_actions == 0) throw InvalidInput("instance: need at least one action");
    if (sparsity == 0 || sparsity > dim) throw InvalidInput("instance: sparsity must lie in [1, d]");
    ActionSet actions(dim, k_actions);
    for (std::size_t k = 0; k < k_actions; ++k) actions.col(static_cast<Eigen::Index>(k)) = sample_unit_sphere(dim, rng);
    Vector theta = Vector::Zero(dim);
    theta.head(sparsity) = sample_unit_sphere(sparsity, rng);
    return BanditInstance(std::move(theta), std::make_unique<FixedActionSetProvider>(std::move(actions)), noise);
}

/// Smallest gap between the optimal arm and any other arm over the given
/// sets. nullopt when no set has a suboptimal arm or when the optimum is tied.
inline std::optional<double> min_gap(const Vector& theta, std::span<const ActionSet> sets) {
    std::optional<double> best;
    for (const ActionSet& set : sets) {
        if (set.cols() < 2) continue;
        const Vector values = set.transpose() * theta;
        Eigen::Index arg = 0;
        const double top = values.maxCoeff(&arg);
        for (Eigen::Index k = 0; k < values.size(); ++k) {
            if (k == arg) continue;
            const double gap = top - values[k];
            if (gap <= 0.0) return std::nullopt;
            if (!best || gap < *best) best = gap;
        }
    }
    return best;
}

/// Minimum gap for a round-independent provider.
inline std::optional<double> min_gap(const BanditInstance& instance) {
    auto set = instance.provider().fixed_set();
    if (!set) throw InvalidInput("min_gap: provider is not round-independent; pass the enumerated sets");
    return min_gap(instance.theta_star(), std::span<const ActionSet>(set.get(), 1));
}

}  // namespace sparse_bandit
