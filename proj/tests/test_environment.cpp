#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "sparse_bandit/environment.hpp"
#include "sparse_bandit/harness.hpp"
#include "test_util.hpp"

namespace sb = sparse_bandit;

namespace {

sb::BanditInstance two_arm_instance(double v0, double v1, sb::NoiseModel noise = sb::NoiseModel::none()) {
    sb::Vector theta = sb::Vector::Unit(2, 0);
    sb::ActionSet set(2, 2);
    set << v0, v1, 0.0, 0.0;
    return sb::BanditInstance(theta, std::make_unique<sb::FixedActionSetProvider>(set), noise);
}

/// Replays the learner's last chosen action, rotated, as the next set.
class EchoProvider final : public sb::ActionSetProvider {
public:
    explicit EchoProvider(std::size_t dim) : dim_(dim) {}
    std::shared_ptr<const sb::ActionSet> next_set(const sb::Transcript& history) override {
        sb::ActionSet set = sb::ActionSet::Identity(dim_, dim_) * 0.9;
        if (!history.empty()) {
            const auto& last = history.back();
            set.col(0) = last.actions->col(static_cast<Eigen::Index>(last.chosen)).reverse();
            set.col(1) *= std::clamp(last.reward, -1.0, 1.0);
        }
        seen_ = history.size();
        return std::make_shared<const sb::ActionSet>(std::move(set));
    }
    std::unique_ptr<sb::ActionSetProvider> clone() const override { return std::make_unique<EchoProvider>(*this); }
    std::size_t seen() const { return seen_; }

private:
    std::size_t dim_;
    std::size_t seen_ = 0;
};

class BadProvider final : public sb::ActionSetProvider {
public:
    std::shared_ptr<const sb::ActionSet> next_set(const sb::Transcript&) override {
        return std::make_shared<const sb::ActionSet>(sb::ActionSet::Constant(2, 1, 1.0));
    }
    std::unique_ptr<sb::ActionSetProvider> clone() const override { return std::make_unique<BadProvider>(); }
};

}  // namespace

TEST(SphereInstance, OneDimensional) {
    sb::Rng rng(81);
    for (int i = 0; i < 20; ++i) {
        const auto inst = sb::generate_fixed_sphere_instance(1, 1, 1, rng);
        EXPECT_EQ(std::abs((*inst.provider().fixed_set())(0, 0)), 1.0);
        EXPECT_EQ(std::abs(inst.theta_star()[0]), 1.0);
    }
}

TEST(SphereInstance, SparseUnitTarget) {
    sb::Rng rng(82);
    for (std::size_t s = 1; s <= 16; ++s) {
        const auto inst = sb::generate_fixed_sphere_instance(16, 30, s, rng);
        EXPECT_NEAR(inst.theta_star().norm(), 1.0, 1e-12);
        EXPECT_EQ(static_cast<std::size_t>((inst.theta_star().array() == 0.0).count()), 16 - s);
        EXPECT_TRUE(inst.theta_star().tail(16 - s).isZero(0.0));
        EXPECT_EQ(inst.sparsity(), s);
        const auto& set = *inst.provider().fixed_set();
        for (Eigen::Index k = 0; k < set.cols(); ++k) EXPECT_NEAR(set.col(k).norm(), 1.0, 1e-12);
    }
    EXPECT_THROW(sb::generate_fixed_sphere_instance(4, 3, 5, rng), sb::InvalidInput);
    EXPECT_THROW(sb::generate_fixed_sphere_instance(4, 0, 1, rng), sb::InvalidInput);
}

TEST(SphereInstance, PairwiseInnerProductsCentered) {
    sb::Rng rng(83);
    const auto inst = sb::generate_fixed_sphere_instance(16, 30, 4, rng);
    const auto& set = *inst.provider().fixed_set();
    double sum = 0.0;
    int pairs = 0;
    for (Eigen::Index i = 0; i < 30; ++i)
        for (Eigen::Index j = i + 1; j < 30; ++j, ++pairs) sum += set.col(i).dot(set.col(j));
    EXPECT_EQ(pairs, 435);
    EXPECT_LE(std::abs(sum / pairs), 0.1);
}

TEST(Reward, NoiselessValues) {
    sb::Rng rng(84);
    sb::Vector theta(2);
    theta << 0.6, 0.8;
    sb::BanditInstance inst(theta, std::make_unique<sb::FixedActionSetProvider>(sb::ActionSet::Identity(2, 2)),
                            sb::NoiseModel::none());
    sb::Vector perp(2);
    perp << 0.8, -0.6;
    EXPECT_EQ(inst.reward(perp, rng), 0.0);
    EXPECT_DOUBLE_EQ(inst.reward(theta, rng), 1.0);
}

TEST(Reward, UniformNoiseMean) {
    sb::Rng rng(85);
    const auto inst = two_arm_instance(0.7, 0.2, sb::NoiseModel::uniform());
    const sb::Vector a = inst.provider().fixed_set()->col(0);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = inst.reward(a, rng);
        ASSERT_LE(std::abs(x - 0.7), 1.0);
        sum += x;
    }
    EXPECT_LE(std::abs(sum / n - 0.7), 3.0 * std::sqrt(1.0 / 3.0) / std::sqrt(n));
}

TEST(Reward, GaussianNoiseScale) {
    sb::Rng rng(86);
    const auto inst = two_arm_instance(0.0, 0.0, sb::NoiseModel::gaussian(2.0));
    const sb::Vector a = inst.provider().fixed_set()->col(0);
    double s2 = 0.0;
    for (int i = 0; i < 50000; ++i) s2 += std::pow(inst.reward(a, rng), 2);
    EXPECT_NEAR(s2 / 50000, 4.0, 0.15);
    EXPECT_THROW(sb::NoiseModel::gaussian(-1.0), sb::InvalidInput);
}

TEST(Reward, UniformAndNoneConsumeOneDraw) {
    for (auto noise : {sb::NoiseModel::uniform(), sb::NoiseModel::none()}) {
        sb::Rng a(9), b(9);
        noise.sample(a);
        b.discard(1);
        EXPECT_EQ(a(), b());
    }
}

TEST(Regret, TwoPointArithmetic) {
    const auto inst = two_arm_instance(0.9, 0.4);
    const auto& set = *inst.provider().fixed_set();
    EXPECT_EQ(inst.instantaneous_regret(set, 0), 0.0);
    EXPECT_NEAR(inst.instantaneous_regret(set, 1), 0.5, 1e-15);
    EXPECT_NEAR(inst.instantaneous_regret(set, sb::Vector(set.col(1))), 0.5, 1e-15);
    EXPECT_THROW(inst.instantaneous_regret(set, sb::Vector::Zero(2)), sb::InvalidInput);
    EXPECT_THROW(inst.instantaneous_regret(set, 2), sb::InvalidInput);
}

TEST(Regret, MatchesBruteForce) {
    sb::Rng rng(87);
    for (int rep = 0; rep < 50; ++rep) {
        const auto inst = sb::generate_fixed_sphere_instance(5, 9, 3, rng);
        const auto& set = *inst.provider().fixed_set();
        const oracle::Vec th = testutil::to_vec(inst.theta_star());
        double best = -1e300;
        for (const auto& a : testutil::columns(set)) best = std::max(best, oracle::dot(a, th));
        for (Eigen::Index k = 0; k < 9; ++k) {
            const double r = inst.instantaneous_regret(set, static_cast<std::size_t>(k));
            EXPECT_NEAR(r, best - oracle::dot(testutil::to_vec(set.col(k)), th), 1e-12);
            EXPECT_GE(r, 0.0);
        }
    }
}

TEST(Regret, InvariantToNoiseRealization) {
    sb::Rng rng(88);
    const auto inst = sb::generate_fixed_sphere_instance(3, 6, 2, rng);
    sb::OfulPolicy a(3, 200), b(3, 200);
    auto i1 = inst, i2 = inst;
    const auto ta = sb::run_episode(a, i1, 200, {0, 1, 2}, "a");
    const auto tb = sb::run_episode(b, i2, 200, {0, 1, 3}, "b");
    const auto& set = *inst.provider().fixed_set();
    for (std::size_t t = 0; t < 200; ++t) {
        EXPECT_EQ(ta.instantaneous[t], inst.instantaneous_regret(set, ta.chosen[t]));
        EXPECT_EQ(tb.instantaneous[t], inst.instantaneous_regret(set, tb.chosen[t]));
    }
}

TEST(MinGap, Examples) {
    sb::Vector theta = sb::Vector::Unit(2, 0);
    sb::ActionSet one = sb::Vector::Unit(2, 0);
    EXPECT_FALSE(sb::min_gap(theta, std::span<const sb::ActionSet>(&one, 1)));
    sb::ActionSet three(2, 3);
    three << 0.9, 0.4, 0.1, 0.0, 0.0, 0.0;
    EXPECT_NEAR(*sb::min_gap(theta, std::span<const sb::ActionSet>(&three, 1)), 0.5, 1e-15);
    sb::ActionSet tied(2, 2);
    tied << 0.5, 0.5, 0.1, -0.1;
    EXPECT_FALSE(sb::min_gap(theta, std::span<const sb::ActionSet>(&tied, 1)));
}

TEST(MinGap, MatchesBruteForce) {
    sb::Rng rng(89);
    for (int rep = 0; rep < 30; ++rep) {
        const auto inst = sb::generate_fixed_sphere_instance(4, 7, 2, rng);
        const auto& set = *inst.provider().fixed_set();
        const oracle::Vec th = testutil::to_vec(inst.theta_star());
        std::vector<double> values;
        for (const auto& a : testutil::columns(set)) values.push_back(oracle::dot(a, th));
        std::sort(values.rbegin(), values.rend());
        EXPECT_NEAR(*sb::min_gap(inst), values[0] - values[1], 1e-12);
    }
    sb::BanditInstance adaptive(sb::Vector::Unit(2, 0), std::make_unique<EchoProvider>(2), sb::NoiseModel::none());
    EXPECT_THROW(sb::min_gap(adaptive), sb::InvalidInput);
}

TEST(Provider, AdaptiveAdversarySeesTranscript) {
    auto provider = std::make_unique<EchoProvider>(3);
    EchoProvider* raw = provider.get();
    sb::BanditInstance inst(sb::Vector::Unit(3, 2), std::move(provider), sb::NoiseModel::uniform());
    sb::OfulPolicy pol(3, 100);
    const auto tr = sb::run_episode(pol, inst, 100, {0, 1, 2}, "echo");
    EXPECT_EQ(raw->seen(), 99u);
    for (double r : tr.instantaneous) EXPECT_GE(r, 0.0);
}

TEST(Provider, NormContractEnforced) {
    sb::BanditInstance inst(sb::Vector::Unit(2, 0), std::make_unique<BadProvider>(), sb::NoiseModel::none());
    EXPECT_THROW(inst.next_set({}), sb::InvalidInput);
    EXPECT_THROW(sb::BanditInstance(sb::Vector::Constant(2, 1.0), std::make_unique<BadProvider>(), sb::NoiseModel::none()),
                 sb::InvalidInput);
}

// Adversarial providers that replay history still respect the norm bounds.
TEST(EnvironmentProperties, AdaptiveSetsStayInBall) {
    sb::Rng rng(90);
    for (std::size_t d : {2u, 3u, 6u}) {
        sb::BanditInstance inst(sb::sample_unit_sphere(d, rng), std::make_unique<EchoProvider>(d), sb::NoiseModel::uniform());
        sb::Transcript hist;
        for (int t = 0; t < 100; ++t) {
            const auto set = inst.next_set(hist);
            for (Eigen::Index k = 0; k < set->cols(); ++k) ASSERT_LE(set->col(k).norm(), 1.0 + 1e-12);
            const std::size_t pick = static_cast<std::size_t>(t) % static_cast<std::size_t>(set->cols());
            hist.push_back({set, pick, inst.reward(set->col(static_cast<Eigen::Index>(pick)), rng)});
        }
    }
}
