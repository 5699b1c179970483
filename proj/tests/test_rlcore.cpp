#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lunarlab/random.hpp"
#include "lunarlab/rlcore.hpp"

using namespace lunarlab;

TEST(EpsilonGreedy, Distributions) {
    const QValues q{1, 3, 2, 0};
    const auto greedy = action_probabilities(q, 0.0);
    EXPECT_EQ(greedy, (std::array<double, 4>{0, 1, 0, 0}));

    const auto soft = action_probabilities(q, 0.05);
    EXPECT_DOUBLE_EQ(soft[0], 0.0125);
    EXPECT_DOUBLE_EQ(soft[1], 0.9625);
    EXPECT_DOUBLE_EQ(soft[2], 0.0125);
    EXPECT_DOUBLE_EQ(soft[3], 0.0125);

    const auto uniform_p = action_probabilities(q, 1.0);
    for (double p : uniform_p) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(EpsilonGreedy, TiesPickLowestCode) {
    EXPECT_EQ(greedy_action(QValues{0, 0, 0, 0}), Action::idle);
    EXPECT_EQ(greedy_action(QValues{-1, 5, 5, 2}), Action::fire_left);
}

TEST(EpsilonGreedy, ValidDistributionAndScaleInvariance) {
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        QValues q{uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
        const double eps = uniform01(rng);
        const auto p = action_probabilities(q, eps);
        double sum = 0.0;
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const double s = uniform(rng, 0.1, 10.0);
        const QValues scaled{q[0] * s, q[1] * s, q[2] * s, q[3] * s};
        EXPECT_EQ(action_probabilities(scaled, eps), p);
    }
}

TEST(EpsilonGreedy, RejectsBadEpsilon) {
    EXPECT_THROW(action_probabilities(QValues{}, -0.1), std::invalid_argument);
    EXPECT_THROW(action_probabilities(QValues{}, 1.1), std::invalid_argument);
}

TEST(EpsilonGreedy, SamplingIsDeterministicAndGreedyAtZero) {
    const QValues q{1, 3, 2, 0};
    Rng a(17), b(17);
    for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_action(q, 0.3, a), sample_action(q, 0.3, b));
    Rng c(1);
    for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_action(q, 0.0, c), Action::fire_left);
}

TEST(EpsilonGreedy, EmpiricalBestActionFrequency) {
    const QValues q{1, 3, 2, 0};
    Rng rng(2024);
    int best = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) best += sample_action(q, 0.05, rng) == Action::fire_left;
    EXPECT_NEAR(static_cast<double>(best) / n, 0.9625, 0.01);
}

TEST(LearningRate, Examples) {
    EXPECT_DOUBLE_EQ(learning_rate(0, 5), 1.0);
    EXPECT_DOUBLE_EQ(learning_rate(5, 5), 0.5);
    EXPECT_DOUBLE_EQ(learning_rate(995, 5), 0.005);
    EXPECT_THROW(learning_rate(-1, 5), std::invalid_argument);
    EXPECT_THROW(learning_rate(0, 0), std::invalid_argument);
}

TEST(LearningRate, ScheduleTicksPerPeriod) {
    LearningRateSchedule s;  // 0.9 * 5 / (5 + t), t = episode / 1000
    EXPECT_DOUBLE_EQ(s.at_episode(0), 0.9);
    EXPECT_DOUBLE_EQ(s.at_episode(999), 0.9);
    EXPECT_DOUBLE_EQ(s.at_episode(1000), 0.9 * 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(s.at_episode(4999), 0.9 * 5.0 / 9.0);
}

TEST(LearningRate, RobbinsMonroPrefixes) {
    const double c = 5.0;
    double sum = 0.0, sq = 0.0, sq_1e3 = 0.0;
    const std::int64_t big = 1'000'000;
    for (std::int64_t t = 0; t <= big; ++t) {
        const double a = learning_rate(t, c);
        sum += a;
        sq += a * a;
        if (t == 1000) sq_1e3 = sq;
    }
    EXPECT_GT(sum, 2.0 * std::log(static_cast<double>(big)));
    EXPECT_LT(sq - sq_1e3, 0.01 * c * c * std::numbers::pi * std::numbers::pi / 6.0);
}

TEST(DiscountedReturn, Examples) {
    const std::vector<double> three{1, 1, 1};
    EXPECT_DOUBLE_EQ(discounted_return(three, 0.5), 1.75);
    EXPECT_EQ(discounted_return(std::vector<double>{}, 0.9), 0.0);
    EXPECT_EQ(discounted_return(std::vector<double>{-3.5}, 0.9), -3.5);
}

TEST(DiscountFactor, OpenInterval) {
    EXPECT_THROW(check_gamma(0.0), std::invalid_argument);
    EXPECT_THROW(check_gamma(1.0), std::invalid_argument);
    EXPECT_NO_THROW(check_gamma(0.9));
}

TEST(Random, DerivedSeedsDifferAndRoundTrip) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    Rng rng(3);
    uniform01(rng);
    Rng copy = load_rng(save_rng(rng));
    EXPECT_EQ(copy(), rng());
    EXPECT_THROW(load_rng("not a state"), std::invalid_argument);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform01(rng);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}
