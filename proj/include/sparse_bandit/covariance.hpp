#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "errors.hpp"
#include "types.hpp"

namespace sparse_bandit {

/// Regularized design matrix V_t = I + sum_s a_s a_s^T together with its
/// inverse, log-determinant and the regularized least-squares estimate
/// theta_hat = V_t^{-1} sum_s a_s x_hat_s.
///
/// The inverse is maintained by rank-one (Sherman-Morrison) updates and is
/// recomputed from a Cholesky factorization every `refresh_period` updates.
class Covariance {
public:
    static constexpr std::size_t kDefaultRefreshPeriod = 1000;

    explicit Covariance(std::size_t dim, std::size_t refresh_period = kDefaultRefreshPeriod)
        : dim_(dim),
          refresh_period_(refresh_period),
          v_(Matrix::Identity(dim, dim)),
          v_inv_(Matrix::Identity(dim, dim)),
          b_(Vector::Zero(dim)),
          theta_hat_(Vector::Zero(dim)) {
        if (dim == 0) throw InvalidInput("covariance: dimension must be positive");
        if (refresh_period == 0) throw InvalidInput("covariance: refresh period must be positive");
    }

    std::size_t dim() const noexcept { return dim_; }
    const Matrix& v() const noexcept { return v_; }
    const Matrix& v_inv() const noexcept { return v_inv_; }
    double log_det() const noexcept { return log_det_; }
    const Vector& b() const noexcept { return b_; }
    const Vector& theta_hat() const noexcept { return theta_hat_; }
    std::size_t step() const noexcept { return step_; }
    std::size_t updates_since_refresh() const noexcept { return updates_since_refresh_; }
    std::size_t refresh_period() const noexcept { return refresh_period_; }

    /// Running sum of min{1, ||a_t||^2_{V_{t-1}^{-1}}} over all updates.
    double elliptic_potential() const noexcept { return potential_; }

    /// ||a||^2_{V_{t-1}^{-1}} of the most recent update (0 before any update).
    double last_quadratic_form() const noexcept { return last_quad_; }

    /// a^T V^{-1} a with tiny negative roundoff clamped to zero.
    double quadratic_form(const Vector& a) const {
        check_dim(a, "quadratic_form");
        return clamp_quadratic(a.dot(v_inv_ * a));
    }

    double mahalanobis_norm(const Vector& a) const { return std::sqrt(quadratic_form(a)); }

    /// V <- V + a a^T, with the inverse and log-determinant updated in O(d^2).
    void rank_one_update(const Vector& a) {
        check_dim(a, "rank_one_update");
        if (!all_finite(a)) throw InvalidInput("rank_one_update: non-finite action");
        if (a.norm() > 1.0 + kNormSlack) throw InvalidInput("rank_one_update: action norm exceeds 1");

        const Vector w = v_inv_ * a;
        const double quad = clamp_quadratic(a.dot(w));
        const double denom = 1.0 + quad;
        if (!(denom > 0.0) || !std::isfinite(denom))
            throw InternalCorruption("rank_one_update: 1 + a^T V^{-1} a is not positive");

        v_.noalias() += a * a.transpose();
        v_inv_.noalias() -= (w * w.transpose()) / denom;
        log_det_ += std::log1p(quad);
        potential_ += std::min(1.0, quad);
        last_quad_ = quad;
        ++step_;
        if (++updates_since_refresh_ >= refresh_period_) refresh();
    }

    /// b <- b + x_hat a and theta_hat <- V^{-1} b. Call after rank_one_update(a).
    void rls_update(const Vector& a, double x_hat) {
        check_dim(a, "rls_update");
        if (!std::isfinite(x_hat)) throw InvalidInput("rls_update: non-finite prediction");
        b_.noalias() += x_hat * a;
        theta_hat_.noalias() = v_inv_ * b_;
    }

    /// Recomputes V^{-1} and log det V exactly from a Cholesky factorization of V.
    void refresh() {
        Eigen::LLT<Matrix> llt(v_);
        if (llt.info() != Eigen::Success)
            throw InternalCorruption("refresh: design matrix is not positive definite");
        v_inv_ = llt.solve(Matrix::Identity(dim_, dim_));
        v_inv_ = 0.5 * (v_inv_ + v_inv_.transpose()).eval();
        const auto& l = llt.matrixLLT();
        double ld = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) ld += std::log(l(i, i));
        log_det_ = 2.0 * ld;
        theta_hat_.noalias() = v_inv_ * b_;
        updates_since_refresh_ = 0;
    }

private:
    static double clamp_quadratic(double q) {
        if (q >= 0.0) return q;
        if (q >= -1e-12) return 0.0;
        throw InternalCorruption("quadratic form " + std::to_string(q) + " is negative");
    }

    void check_dim(const Vector& a, const char* op) const {
        if (static_cast<std::size_t>(a.size()) != dim_)
            throw InvalidInput(std::string(op) + ": dimension mismatch");
    }

    std::size_t dim_;
    std::size_t refresh_period_;
    Matrix v_;
    Matrix v_inv_;
    double log_det_ = 0.0;
    Vector b_;
    Vector theta_hat_;
    std::size_t step_ = 0;
    std::size_t updates_since_refresh_ = 0;
    double potential_ = 0.0;
    double last_quad_ = 0.0;
};

}  // namespace sparse_bandit
