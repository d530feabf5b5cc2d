#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confidence.hpp"
#include "covariance.hpp"
#include "errors.hpp"
#include "regressors.hpp"
#include "selection.hpp"
#include "types.hpp"

namespace sparse_bandit {

/// Level recorded for policies that do not draw from the ladder.
inline constexpr int kNoLevel = -1;

struct UcbChoice {
    std::size_t index = 0;
    double score = 0.0;
};

inline void validate_actions(const ActionSet& actions, std::size_t dim) {
    if (actions.cols() == 0) throw InvalidInput("action set is empty");
    if (static_cast<std::size_t>(actions.rows()) != dim) throw InvalidInput("action set has wrong dimension");
    if (!actions.allFinite()) throw InvalidInput("action set has non-finite entries");
    for (Eigen::Index k = 0; k < actions.cols(); ++k)
        if (actions.col(k).norm() > 1.0 + kNormSlack)
            throw InvalidInput("action " + std::to_string(k) + " has norm above 1");
}

/// ||a_k||_{V^{-1}} for every column of `actions`.
inline Vector exploration_norms(const ActionSet& actions, const Covariance& cov) {
    const Matrix w = cov.v_inv() * actions;
    Vector out(actions.cols());
    for (Eigen::Index k = 0; k < actions.cols(); ++k) {
        double q = actions.col(k).dot(w.col(k));
        if (q < 0.0) {
            if (q < -1e-12) throw InternalCorruption("exploration_norms: negative quadratic form");
            q = 0.0;
        }
        out[k] = std::sqrt(q);
    }
    return out;
}

/// argmax_k <a_k, theta_hat> + sqrt(alpha) ||a_k||_{V^{-1}}, where alpha is the
/// squared radius. Scores within kTieTolerance go to the lowest index.
inline UcbChoice ucb_argmax(const ActionSet& actions, const Covariance& cov, double alpha) {
    validate_actions(actions, cov.dim());
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("ucb_argmax: radius must be finite and nonnegative");
    const Vector means = actions.transpose() * cov.theta_hat();
    const double root = std::sqrt(alpha);
    UcbChoice best{0, 0.0};
    if (root == 0.0) {
        best.score = means[0];
        for (Eigen::Index k = 1; k < actions.cols(); ++k)
            if (means[k] > best.score + kTieTolerance) best = {static_cast<std::size_t>(k), means[k]};
        return best;
    }
    const Vector norms = exploration_norms(actions, cov);
    best.score = means[0] + root * norms[0];
    for (Eigen::Index k = 1; k < actions.cols(); ++k) {
        const double s = means[k] + root * norms[k];
        if (s > best.score + kTieTolerance) best = {static_cast<std::size_t>(k), s};
    }
    return best;
}

/// Squared OFUL radius (sqrt(2 log T + log det V) + 1)^2 for unit regularizer and delta = 1/T.
inline double oful_radius(std::uint64_t horizon, double log_det) {
    const double root = std::sqrt(2.0 * std::log(static_cast<double>(horizon)) + log_det) + 1.0;
    return root * root;
}

enum class Branch {
    Fixed,          ///< deterministic radius (OFUL, greedy, fixed level)
    Sampled,        ///< level drawn from a selection distribution or Exp3
    ForcedExplore,  ///< AdaLinUCB Z_t = 1 round at the top radius
};

struct Choice {
    std::size_t index = 0;
    int level = kNoLevel;
    double alpha = 0.0;
    Branch branch = Branch::Fixed;
};

/// Shared round protocol: choose() picks an action and records it, observe()
/// takes the reward and performs, in order, V_t = V_{t-1} + A_t A_t^T, the
/// regressor round producing X_hat_t, and the least-squares update.
class Policy {
public:
    Policy(std::size_t dim, std::unique_ptr<OnlineRegressor> regressor, std::size_t refresh_period)
        : cov_(dim, refresh_period), regressor_(std::move(regressor)) {
        if (!regressor_) regressor_ = std::make_unique<PassthroughRegressor>();
    }
    virtual ~Policy() = default;

    Policy(const Policy&) = delete;
    Policy& operator=(const Policy&) = delete;

    Choice choose(const ActionSet& actions, Rng& rng, std::uint64_t t) {
        if (pending_) throw ProtocolViolation("choose called twice without a reward");
        if (t == 0) throw InvalidInput("round index starts at 1");
        validate_actions(actions, cov_.dim());
        Choice c = select(actions, rng, t);
        pending_action_ = actions.col(static_cast<Eigen::Index>(c.index));
        pending_ = true;
        return c;
    }

    void observe(double reward) {
        if (!pending_) throw ProtocolViolation("reward supplied before an action was chosen");
        if (!std::isfinite(reward)) throw InvalidInput("non-finite reward");
        on_reward(reward);
        cov_.rank_one_update(pending_action_);
        const double x_hat = regressor_->feed(pending_action_, reward);
        cov_.rls_update(pending_action_, x_hat);
        pending_ = false;
    }

    const Covariance& covariance() const noexcept { return cov_; }
    const OnlineRegressor& regressor() const noexcept { return *regressor_; }
    virtual std::string kind() const = 0;

protected:
    virtual Choice select(const ActionSet& actions, Rng& rng, std::uint64_t t) = 0;
    virtual void on_reward(double /*reward*/) {}

    Covariance cov_;

private:
    std::unique_ptr<OnlineRegressor> regressor_;
    Vector pending_action_;
    bool pending_ = false;
};

/// OFUL with the log-determinant radius.
class OfulPolicy final : public Policy {
public:
    OfulPolicy(std::size_t dim, std::uint64_t horizon, std::unique_ptr<OnlineRegressor> regressor = nullptr,
               std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : Policy(dim, std::move(regressor), refresh_period), horizon_(horizon) {
        if (horizon == 0) throw InvalidInput("oful: horizon must be positive");
    }
    std::string kind() const override { return "oful"; }

protected:
    Choice select(const ActionSet& actions, Rng&, std::uint64_t) override {
        const double alpha = oful_radius(horizon_, cov_.log_det());
        return {ucb_argmax(actions, cov_, alpha).index, kNoLevel, alpha, Branch::Fixed};
    }

private:
    std::uint64_t horizon_;
};

/// argmax <a, theta_hat>.
class GreedyPolicy final : public Policy {
public:
    explicit GreedyPolicy(std::size_t dim, std::unique_ptr<OnlineRegressor> regressor = nullptr,
                          std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : Policy(dim, std::move(regressor), refresh_period) {}
    std::string kind() const override { return "greedy"; }

protected:
    Choice select(const ActionSet& actions, Rng&, std::uint64_t) override {
        return {ucb_argmax(actions, cov_, 0.0).index, kNoLevel, 0.0, Branch::Fixed};
    }
};

/// Always plays the radius of one ladder level.
class FixedLevelPolicy final : public Policy {
public:
    FixedLevelPolicy(std::size_t dim, RadiusLadder ladder, std::size_t level,
                     std::unique_ptr<OnlineRegressor> regressor = nullptr,
                     std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : Policy(dim, std::move(regressor), refresh_period), ladder_(ladder), level_(level) {
        ladder_.position_of(level);
    }
    std::string kind() const override { return "fixed_level"; }

protected:
    Choice select(const ActionSet& actions, Rng&, std::uint64_t t) override {
        const double alpha = ladder_.radius(level_, t);
        return {ucb_argmax(actions, cov_, alpha).index, static_cast<int>(level_), alpha, Branch::Fixed};
    }

private:
    RadiusLadder ladder_;
    std::size_t level_;
};

/// Draws the ladder level I_t from a fixed distribution each round.
class SparseLinUcbPolicy final : public Policy {
public:
    SparseLinUcbPolicy(std::size_t dim, RadiusLadder ladder, SelectionDistribution dist,
                       std::unique_ptr<OnlineRegressor> regressor = nullptr,
                       std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : Policy(dim, std::move(regressor), refresh_period), ladder_(ladder), dist_(std::move(dist)) {
        dist_.validate();
        if (dist_.size() != ladder_.n_levels())
            throw InvalidInput("sparse_linucb: distribution size differs from ladder size");
    }
    std::string kind() const override { return "sparse_linucb"; }
    const SelectionDistribution& distribution() const noexcept { return dist_; }
    const RadiusLadder& ladder() const noexcept { return ladder_; }

protected:
    Choice select(const ActionSet& actions, Rng& rng, std::uint64_t t) override {
        const std::size_t level = ladder_.level_at(sample_level(dist_, rng));
        const double alpha = ladder_.radius(level, t);
        return {ucb_argmax(actions, cov_, alpha).index, static_cast<int>(level), alpha, Branch::Sampled};
    }

private:
    RadiusLadder ladder_;
    SelectionDistribution dist_;
};

/// Exp3 over ladder levels with Bernoulli(explore_q) forced exploration at the
/// top radius. Every round consumes one uniform for Z_t; Exp3 rounds consume a
/// second one for I_t.
class AdaLinUcbPolicy final : public Policy {
public:
    AdaLinUcbPolicy(std::size_t dim, RadiusLadder ladder, Exp3State exp3,
                    std::unique_ptr<OnlineRegressor> regressor = nullptr,
                    std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : Policy(dim, std::move(regressor), refresh_period), ladder_(ladder), exp3_(std::move(exp3)) {
        if (exp3_.size() != ladder_.n_levels()) throw InvalidInput("ada_linucb: Exp3 size differs from ladder size");
    }
    std::string kind() const override { return "ada_linucb"; }
    const Exp3State& exp3() const noexcept { return exp3_; }
    const RadiusLadder& ladder() const noexcept { return ladder_; }

protected:
    Choice select(const ActionSet& actions, Rng& rng, std::uint64_t t) override {
        const bool explore = uniform01(rng) < exp3_.explore_q;
        if (explore) {
            last_ = std::nullopt;
            const double alpha = ladder_.top_radius(t);
            return {ucb_argmax(actions, cov_, alpha).index, static_cast<int>(ladder_.top_level()), alpha,
                    Branch::ForcedExplore};
        }
        const std::vector<double> probs = exp3_probs(exp3_, t);
        const std::size_t pos = sample_categorical(std::span<const double>(probs), rng);
        last_ = Draw{pos, probs[pos]};
        const std::size_t level = ladder_.level_at(pos);
        const double alpha = ladder_.radius(level, t);
        return {ucb_argmax(actions, cov_, alpha).index, static_cast<int>(level), alpha, Branch::Sampled};
    }

    void on_reward(double reward) override {
        if (last_) exp3_update(exp3_, last_->position, reward, last_->prob);
    }

private:
    struct Draw {
        std::size_t position;
        double prob;
    };

    RadiusLadder ladder_;
    Exp3State exp3_;
    std::optional<Draw> last_;
};

}  // namespace sparse_bandit
