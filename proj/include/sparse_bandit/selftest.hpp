#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "confidence.hpp"
#include "covariance.hpp"
#include "environment.hpp"
#include "policies.hpp"
#include "types.hpp"

namespace sparse_bandit {

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst = 0.0;  ///< largest violation or error observed
    std::string detail;
};

/// Runtime invariant suite over random episodes: rank-one inverse drift, RLS
/// against a direct solve, determinant-ratio identity, elliptic potential,
/// determinant-trace bound, radius/norm monotonicity and the ellipsoid identity.
inline std::vector<CheckResult> run_selftest(std::uint64_t seed, std::size_t episodes = 40, std::uint64_t horizon = 300) {
    CheckResult inverse{"inverse_vs_cholesky", true, 0.0, "max-abs <= 1e-8"};
    CheckResult rls{"rls_vs_direct_solve", true, 0.0, "max-abs <= 1e-7"};
    CheckResult det_ratio{"det_ratio_identity", true, 0.0, "abs <= 1e-8"};
    CheckResult potential{"elliptic_potential", true, 0.0, "sum min{1,|a|^2} <= 2 log det V"};
    CheckResult det_trace{"det_trace_bound", true, 0.0, "log det V <= d log(1 + T/d)"};
    CheckResult monotone{"norm_monotonicity", true, 0.0, "|A^p| <= |A^q| + 1e-10 for p <= q"};
    CheckResult ellipsoid{"ellipsoid_identity", true, 0.0, "relative error <= 1e-6"};

    Rng rng(seed);
    const std::size_t dims[] = {2, 4, 8, 16};
    for (std::size_t e = 0; e < episodes; ++e) {
        const std::size_t d = dims[e % 4];
        BanditInstance inst = generate_fixed_sphere_instance(d, 10, 1 + e % d, rng);
        const ActionSet& actions = *inst.provider().fixed_set();
        const RadiusLadder ladder = RadiusLadder::fixed_horizon(6, horizon);
        Covariance cov(d, 97);
        std::vector<Vector> played;
        std::vector<double> rewards;
        std::uniform_int_distribution<std::size_t> pick_level(ladder.first_level(), ladder.top_level());
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            // Optimistic actions at every level must have nondecreasing exploration norms.
            const Vector norms = exploration_norms(actions, cov);
            double prev = 0.0;
            for (std::size_t lv = ladder.first_level(); lv <= ladder.top_level(); ++lv) {
                const double n = norms[static_cast<Eigen::Index>(ucb_argmax(actions, cov, ladder.radius(lv, t)).index)];
                if (lv > ladder.first_level()) monotone.worst = std::max(monotone.worst, prev - n);
                prev = n;
            }
            const std::size_t idx = ucb_argmax(actions, cov, ladder.radius(pick_level(rng), t)).index;
            const Vector a = actions.col(static_cast<Eigen::Index>(idx));
            const double x = inst.reward(a, rng);
            const double before = cov.log_det();
            const double quad = cov.quadratic_form(a);
            cov.rank_one_update(a);
            cov.rls_update(a, x);
            det_ratio.worst = std::max(det_ratio.worst, std::abs(cov.log_det() - before - std::log1p(quad)));
            played.push_back(a);
            rewards.push_back(x);
        }
        const Eigen::LLT<Matrix> llt(cov.v());
        inverse.worst = std::max(inverse.worst, (cov.v_inv() - llt.solve(Matrix::Identity(d, d))).cwiseAbs().maxCoeff());
        rls.worst = std::max(rls.worst, (cov.theta_hat() - llt.solve(cov.b())).cwiseAbs().maxCoeff());
        potential.worst = std::max(potential.worst, cov.elliptic_potential() - 2.0 * cov.log_det());
        det_trace.worst = std::max(det_trace.worst,
                                   cov.log_det() - static_cast<double>(d) *
                                                       std::log1p(static_cast<double>(horizon) / static_cast<double>(d)));
        for (int k = 0; k < 5; ++k) {
            const Vector theta = cov.theta_hat() + 2.0 * uniform01(rng) * sample_unit_sphere(d, rng);
            double lhs = theta.squaredNorm(), rhs_res = cov.theta_hat().squaredNorm();
            for (std::size_t s = 0; s < played.size(); ++s) {
                lhs += std::pow(rewards[s] - played[s].dot(theta), 2);
                rhs_res += std::pow(rewards[s] - played[s].dot(cov.theta_hat()), 2);
            }
            const Vector diff = theta - cov.theta_hat();
            const double rhs = diff.dot(cov.v() * diff) + rhs_res;
            ellipsoid.worst = std::max(ellipsoid.worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    inverse.passed = inverse.worst <= 1e-8;
    rls.passed = rls.worst <= 1e-7;
    det_ratio.passed = det_ratio.worst <= 1e-8;
    potential.passed = potential.worst <= 1e-6;
    det_trace.passed = det_trace.worst <= 1e-9;
    monotone.passed = monotone.worst <= 1e-10;
    ellipsoid.passed = ellipsoid.worst <= 1e-6;
    return {inverse, rls, det_ratio, potential, det_trace, monotone, ellipsoid};
}

}  // namespace sparse_bandit
