#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "reference_algorithms.hpp"
#include "sparse_bandit/harness.hpp"
#include "sparse_bandit/policies.hpp"
#include "test_util.hpp"

namespace sb = sparse_bandit;
using EtaMode = sb::Exp3State::EtaMode;

namespace {

/// Brute-force UCB argmax with the lowest index winning ties.
std::size_t brute_argmax(const sb::ActionSet& set, const sb::Covariance& cov, double alpha) {
    const oracle::Mat v = testutil::to_mat(cov.v());
    const oracle::Vec th = testutil::to_vec(cov.theta_hat());
    std::size_t best = 0;
    double best_score = -1e300;
    for (Eigen::Index k = 0; k < set.cols(); ++k) {
        const oracle::Vec a = testutil::to_vec(set.col(k));
        const double s = oracle::dot(a, th) + std::sqrt(alpha) * oracle::mahalanobis_by_solve(v, a);
        if (s > best_score + 1e-12) {
            best = static_cast<std::size_t>(k);
            best_score = s;
        }
    }
    return best;
}

template <typename P>
std::vector<std::size_t> play(P& policy, sb::BanditInstance inst, std::uint64_t horizon, std::uint64_t seed) {
    return sb::run_episode(policy, inst, horizon, {0, seed, seed + 1}, "p").chosen;
}

}  // namespace

TEST(UcbArgmax, SingleAction) {
    sb::Covariance cov(3);
    sb::ActionSet set = sb::Vector::Unit(3, 1);
    EXPECT_EQ(sb::ucb_argmax(set, cov, 5.0).index, 0u);
}

TEST(UcbArgmax, IdentityMetricPicksLongestAction) {
    sb::Covariance cov(2);
    sb::ActionSet set(2, 3);
    set << 0.3, 0.0, 0.5,  //
        0.0, 0.9, 0.5;
    EXPECT_EQ(sb::ucb_argmax(set, cov, 1.0).index, 1u);
    EXPECT_NEAR(sb::ucb_argmax(set, cov, 1.0).score, 0.9, 1e-15);
}

TEST(UcbArgmax, TiesGoToLowestIndex) {
    sb::Covariance cov(2);
    sb::ActionSet set(2, 3);
    set << 0.0, 1.0, 0.0,  //
        1.0, 0.0, -1.0;
    EXPECT_EQ(sb::ucb_argmax(set, cov, 1.0).index, 0u);
}

TEST(UcbArgmax, MatchesBruteForce) {
    sb::Rng rng(61);
    for (int rep = 0; rep < 50; ++rep) {
        sb::Covariance cov(4);
        for (int i = 0; i < 30; ++i) {
            const sb::Vector a = testutil::random_ball(4, rng);
            cov.rank_one_update(a);
            cov.rls_update(a, std::uniform_real_distribution<double>(-1, 1)(rng));
        }
        const sb::ActionSet set = testutil::random_actions(4, 10, rng);
        for (double alpha : {0.0, 0.5, 4.0, 40.0}) EXPECT_EQ(sb::ucb_argmax(set, cov, alpha).index, brute_argmax(set, cov, alpha));
    }
}

TEST(UcbArgmax, RejectsInvalidSets) {
    sb::Covariance cov(2);
    EXPECT_THROW(sb::ucb_argmax(sb::ActionSet(2, 0), cov, 1.0), sb::InvalidInput);
    EXPECT_THROW(sb::ucb_argmax(sb::ActionSet::Constant(2, 1, 1.0), cov, 1.0), sb::InvalidInput);
    EXPECT_THROW(sb::ucb_argmax(sb::ActionSet::Zero(3, 1), cov, 1.0), sb::InvalidInput);
    EXPECT_THROW(sb::ucb_argmax(sb::ActionSet::Zero(2, 1), cov, -1.0), sb::InvalidInput);
}

TEST(UcbArgmax, QuadruplingRadiusDoublesBonus) {
    sb::Rng rng(62);
    sb::Covariance cov(3);
    for (int i = 0; i < 20; ++i) {
        const sb::Vector a = testutil::random_ball(3, rng);
        cov.rank_one_update(a);
        cov.rls_update(a, sb::uniform01(rng));
    }
    const sb::ActionSet set = testutil::random_actions(3, 12, rng);
    const sb::Vector norms = sb::exploration_norms(set, cov);
    const sb::Vector means = set.transpose() * cov.theta_hat();
    for (double alpha : {0.3, 2.0, 9.0}) {
        Eigen::Index expected = 0;
        (means + 2.0 * std::sqrt(alpha) * norms).maxCoeff(&expected);
        EXPECT_EQ(sb::ucb_argmax(set, cov, 4.0 * alpha).index, static_cast<std::size_t>(expected));
    }
}

TEST(Policy, ProtocolViolations) {
    sb::Rng rng(63);
    sb::OfulPolicy p(2, 100);
    EXPECT_THROW(p.observe(0.1), sb::ProtocolViolation);
    const sb::ActionSet set = sb::ActionSet::Identity(2, 2);
    p.choose(set, rng, 1);
    EXPECT_THROW(p.choose(set, rng, 2), sb::ProtocolViolation);
    EXPECT_THROW(p.observe(std::nan("")), sb::InvalidInput);
    p.observe(0.5);
    EXPECT_THROW(p.observe(0.5), sb::ProtocolViolation);
    EXPECT_THROW(p.choose(set, rng, 0), sb::InvalidInput);
}

TEST(Oful, FirstRoundRadius) {
    sb::Rng rng(64);
    sb::OfulPolicy p(3, 1000);
    const auto c = p.choose(sb::ActionSet::Identity(3, 3), rng, 1);
    const double root = std::sqrt(2.0 * std::log(1000.0)) + 1.0;
    EXPECT_NEAR(c.alpha, root * root, 1e-12);
    EXPECT_EQ(c.level, sb::kNoLevel);
}

TEST(Policies, SingleActionSetsHaveZeroRegret) {
    sb::Rng rng(65);
    const sb::Vector theta = sb::sample_unit_sphere(3, rng);
    sb::BanditInstance inst(theta, std::make_unique<sb::FixedActionSetProvider>(sb::ActionSet(sb::sample_unit_sphere(3, rng))),
                            sb::NoiseModel::uniform());
    const auto ladder = sb::RadiusLadder::fixed_horizon(4, 50);
    sb::OfulPolicy oful(3, 50);
    sb::SparseLinUcbPolicy sl(3, ladder, sb::SelectionDistribution::uniform(4));
    sb::AdaLinUcbPolicy al(3, ladder, sb::Exp3State::make(std::vector<double>(4, 0.25), EtaMode::TimeVarying, 0, 0.2));
    for (sb::Policy* p : std::initializer_list<sb::Policy*>{&oful, &sl, &al}) {
        auto copy = inst;
        const auto tr = sb::run_episode(*p, copy, 50, {0, 1, 2}, "x");
        for (double r : tr.instantaneous) EXPECT_EQ(r, 0.0);
    }
}

TEST(Oful, NoiselessRegretBound) {
    sb::Rng rng(66);
    const std::size_t d = 4;
    const std::uint64_t horizon = 2000;
    auto inst = sb::generate_fixed_sphere_instance(d, 8, d, rng, sb::NoiseModel::none());
    sb::OfulPolicy p(d, horizon);
    const auto tr = sb::run_episode(p, inst, horizon, {0, 1, 2}, "oful");
    EXPECT_LT(tr.cumulative.back(), 0.5 * d * std::sqrt(static_cast<double>(horizon)) * std::log(static_cast<double>(horizon)));
}

TEST(SparseLinUcb, PointMassEqualsFixedLevel) {
    sb::Rng rng(67);
    for (std::size_t level = 1; level <= 5; ++level) {
        const auto inst = sb::generate_fixed_sphere_instance(4, 10, 2, rng);
        const auto ladder = sb::RadiusLadder::fixed_horizon(5, 300);
        sb::SparseLinUcbPolicy sl(4, ladder, sb::SelectionDistribution::point_mass(5, ladder.position_of(level)));
        sb::FixedLevelPolicy fl(4, ladder, level);
        EXPECT_EQ(play(sl, inst, 300, 9), play(fl, inst, 300, 9));
    }
}

TEST(AdaLinUcb, FullExplorationEqualsTopLevel) {
    sb::Rng rng(68);
    const auto inst = sb::generate_fixed_sphere_instance(4, 10, 2, rng);
    const auto ladder = sb::RadiusLadder::time_dependent(6, 300);
    sb::AdaLinUcbPolicy al(4, ladder, sb::Exp3State::make(std::vector<double>(6, 1.0 / 6), EtaMode::TimeVarying, 0, 1.0));
    sb::FixedLevelPolicy fl(4, ladder, ladder.top_level());
    EXPECT_EQ(play(al, inst, 300, 5), play(fl, inst, 300, 5));
    EXPECT_EQ(al.exp3().cumulative, std::vector<double>(6, 0.0));
}

TEST(AdaLinUcb, SingleLevelEqualsFixedLevel) {
    sb::Rng rng(69);
    const auto inst = sb::generate_fixed_sphere_instance(3, 7, 3, rng);
    const auto ladder = sb::RadiusLadder::fixed_horizon(1, 200);
    sb::AdaLinUcbPolicy al(3, ladder, sb::Exp3State::make({1.0}, EtaMode::Fixed, 0.1, 0.0));
    sb::FixedLevelPolicy fl(3, ladder, 1);
    EXPECT_EQ(play(al, inst, 200, 3), play(fl, inst, 200, 3));
}

TEST(AdaLinUcb, ExplorationRoundsSkipExp3) {
    sb::Rng rng(70);
    auto inst = sb::generate_fixed_sphere_instance(3, 5, 2, rng);
    const auto ladder = sb::RadiusLadder::fixed_horizon(3, 100);
    sb::AdaLinUcbPolicy al(3, ladder, sb::Exp3State::make(std::vector<double>(3, 1.0 / 3), EtaMode::Fixed, 0.1, 0.5));
    sb::Rng prng(1), nrng(2);
    const auto set = inst.provider().fixed_set();
    int explored = 0;
    for (std::uint64_t t = 1; t <= 100; ++t) {
        const auto before = al.exp3().cumulative;
        const auto c = al.choose(*set, prng, t);
        al.observe(inst.reward(set->col(static_cast<Eigen::Index>(c.index)), nrng));
        if (c.branch == sb::Branch::ForcedExplore) {
            ++explored;
            EXPECT_EQ(al.exp3().cumulative, before);
            EXPECT_EQ(c.level, 3);
        }
    }
    EXPECT_GT(explored, 20);
    EXPECT_LT(explored, 80);
}

TEST(ReferenceTranscription, SparseLinUcb) {
    sb::Rng rng(71);
    for (int rep = 0; rep < 5; ++rep) {
        const auto pb = testutil::reference_problem(2, 3, 50, rng);
        const std::vector<double> q{0.1, 0.2, 0.3, 0.4};
        sb::SparseLinUcbPolicy pol(2, sb::RadiusLadder::fixed_horizon(4, 50), sb::SelectionDistribution::custom(q));
        EXPECT_EQ(testutil::library_trajectory(pol, pb), reference::sparse_linucb(pb, q));
    }
}

TEST(ReferenceTranscription, AdaLinUcb) {
    sb::Rng rng(72);
    for (int rep = 0; rep < 5; ++rep) {
        const auto pb = testutil::reference_problem(2, 3, 50, rng);
        for (double q : {0.0, 0.3}) {
            sb::AdaLinUcbPolicy pol(2, sb::RadiusLadder::fixed_horizon(4, 50),
                                    sb::Exp3State::make(std::vector<double>(4, 0.25), EtaMode::Fixed, 0.5, q));
            EXPECT_EQ(testutil::library_trajectory(pol, pb), reference::ada_linucb(pb, 4, 0.5, q));
        }
    }
}

TEST(Policies, SeedDeterminism) {
    sb::Rng rng(73);
    const auto inst = sb::generate_fixed_sphere_instance(5, 12, 3, rng);
    const auto ladder = sb::RadiusLadder::time_dependent(6, 400);
    auto make = [&] {
        return sb::AdaLinUcbPolicy(5, ladder, sb::Exp3State::make(sb::theory_distribution(1.0, 6).probs, EtaMode::TimeVarying, 0, 0.1));
    };
    auto a = make();
    auto b = make();
    EXPECT_EQ(play(a, inst, 400, 77), play(b, inst, 400, 77));
}

// Optimistic actions at nested radii have nondecreasing exploration norms.
TEST(PolicyProperties, NormMonotonicityAcrossLevels) {
    sb::Rng rng(74);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t d = 2 + rep % 6;
        auto inst = sb::generate_fixed_sphere_instance(d, 15, 1 + rep % d, rng);
        const auto ladder = sb::RadiusLadder::time_dependent(6, 300);
        sb::SparseLinUcbPolicy pol(d, ladder, sb::SelectionDistribution::uniform(6));
        const auto set = inst.provider().fixed_set();
        sb::Rng prng(rep), nrng(rep + 100);
        for (std::uint64_t t = 1; t <= 300; ++t) {
            const sb::Vector norms = sb::exploration_norms(*set, pol.covariance());
            for (std::size_t p = 0; p < 6; ++p)
                for (std::size_t q = p; q < 6; ++q) {
                    const auto ap = sb::ucb_argmax(*set, pol.covariance(), ladder.radius(p, t)).index;
                    const auto aq = sb::ucb_argmax(*set, pol.covariance(), ladder.radius(q, t)).index;
                    ASSERT_LE(norms[static_cast<Eigen::Index>(ap)], norms[static_cast<Eigen::Index>(aq)] + 1e-10);
                }
            const auto c = pol.choose(*set, prng, t);
            pol.observe(inst.reward(set->col(static_cast<Eigen::Index>(c.index)), nrng));
        }
    }
}

TEST(Policies, ConstructorValidation) {
    const auto ladder = sb::RadiusLadder::fixed_horizon(4, 100);
    EXPECT_THROW(sb::SparseLinUcbPolicy(2, ladder, sb::SelectionDistribution::uniform(3)), sb::InvalidInput);
    EXPECT_THROW(sb::AdaLinUcbPolicy(2, ladder, sb::Exp3State::make({1.0}, EtaMode::Fixed, 1, 0)), sb::InvalidInput);
    EXPECT_THROW(sb::FixedLevelPolicy(2, ladder, 0), sb::InvalidInput);
    EXPECT_THROW(sb::OfulPolicy(2, 0), sb::InvalidInput);
}
