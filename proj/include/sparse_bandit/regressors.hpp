#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>

#include "covariance.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace sparse_bandit {

/// Online linear regression learner producing the predictions X_hat_t that
/// feed the regularized least-squares estimate of a bandit policy.
///
/// Protocol per round: predict(a) is issued before the outcome is revealed,
/// then observe(a, x). feed() runs both and returns the prediction.
class OnlineRegressor {
public:
    virtual ~OnlineRegressor() = default;

    virtual double predict(const Vector& a) = 0;
    virtual void observe(const Vector& a, double x) = 0;

    /// Runs one full round and returns the prediction made before `x` was seen.
    virtual double feed(const Vector& a, double x) {
        const double prediction = predict(a);
        observe(a, x);
        return prediction;
    }

    virtual std::unique_ptr<OnlineRegressor> clone() const = 0;
    virtual std::string name() const = 0;
};

/// Returns the realized reward unchanged.
inline double passthrough_predict(const Vector& /*a*/, double pending_reward) { return pending_reward; }

/// X_hat_t = X_t. The harness reveals the reward before the prediction is
/// requested, so the online squared loss is identically zero.
class PassthroughRegressor final : public OnlineRegressor {
public:
    double predict(const Vector&) override {
        throw ProtocolViolation("passthrough regressor: prediction requires the realized reward; use feed()");
    }
    void observe(const Vector&, double) override {}
    double feed(const Vector& a, double x) override { return passthrough_predict(a, x); }

    std::unique_ptr<OnlineRegressor> clone() const override { return std::make_unique<PassthroughRegressor>(*this); }
    std::string name() const override { return "passthrough"; }
};

/// Online ridge regression with unit regularizer. Predictions are clipped to
/// [-1 - noise_bound, 1 + noise_bound].
class RidgeRegressor final : public OnlineRegressor {
public:
    explicit RidgeRegressor(std::size_t dim, double noise_bound = 1.0,
                            std::size_t refresh_period = Covariance::kDefaultRefreshPeriod)
        : cov_(dim, refresh_period), noise_bound_(noise_bound) {
        if (!(noise_bound >= 0.0) || !std::isfinite(noise_bound))
            throw InvalidInput("ridge regressor: noise bound must be finite and nonnegative");
    }

    double predict(const Vector& a) override {
        if (static_cast<std::size_t>(a.size()) != cov_.dim()) throw InvalidInput("ridge predict: dimension mismatch");
        if (!all_finite(a)) throw InvalidInput("ridge predict: non-finite input");
        if (a.norm() > 1.0 + kNormSlack) throw InvalidInput("ridge predict: input norm exceeds 1");
        const double bound = 1.0 + noise_bound_;
        pending_ = true;
        return std::clamp(cov_.theta_hat().dot(a), -bound, bound);
    }

    void observe(const Vector& a, double x) override {
        if (!pending_) throw ProtocolViolation("ridge observe: no prediction issued this round");
        if (!std::isfinite(x)) throw InvalidInput("ridge observe: non-finite outcome");
        cov_.rank_one_update(a);
        cov_.rls_update(a, x);
        pending_ = false;
    }

    const Vector& estimate() const noexcept { return cov_.theta_hat(); }
    double noise_bound() const noexcept { return noise_bound_; }

    std::unique_ptr<OnlineRegressor> clone() const override { return std::make_unique<RidgeRegressor>(*this); }
    std::string name() const override { return "ridge"; }

private:
    Covariance cov_;
    double noise_bound_;
    bool pending_ = false;
};

}  // namespace sparse_bandit
