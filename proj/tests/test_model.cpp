// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "qot/model.hpp"
#include "qot/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qot;

TEST(AchievableRate, Examples) {
    EXPECT_DOUBLE_EQ(achievable_rate(1.0, 1.0, 1.0, 1.0), 1.0);
    EXPECT_EQ(achievable_rate(0.0, 5.0, 1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(achievable_rate(2.0, 6.0, 1.0, 1.0), 4.0);
}

TEST(AchievableRate, RejectsNegativeInputs) {
    EXPECT_THROW(achievable_rate(-1.0, 1.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(achievable_rate(1.0, -1.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(achievable_rate(1.0, 1.0, 0.0, 1.0), DomainError);
}

TEST(AchievableRate, JointlyConcave) {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double g = rng.uniform(0.1, 10.0);
        const double u1 = rng.uniform(0.0, 5.0), p1 = rng.uniform(0.0, 5.0);
        const double u2 = rng.uniform(0.0, 5.0), p2 = rng.uniform(0.0, 5.0);
        const double t = rng.uniform();
        const double mid = achievable_rate(t * u1 + (1 - t) * u2, t * p1 + (1 - t) * p2, g, 1.0);
        const double chord = t * achievable_rate(u1, p1, g, 1.0) + (1 - t) * achievable_rate(u2, p2, g, 1.0);
        EXPECT_GE(mid, chord - 1e-9);
    }
}

TEST(SampleCount, Examples) {
    const auto c = fixtures::cav(Modality::Image, 1.0, 1.0, 1.0, 1.0);
    Scenario s = fixtures::unit_scenario(Matrix::Constant(1, 1, 1.0), {c});
    // rate 5 bits/s in one slot of 1 s with 1-bit samples.
    const double snr = std::exp2(5.0) - 1.0;
    EXPECT_NEAR(sample_count(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, snr), s, 0), 5.0, 1e-12);
    EXPECT_EQ(sample_count(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1), s, 0), 0.0);

    s = fixtures::unit_scenario(Matrix::Constant(1, 2, 1.0), {c});
    s.slot_duration_s = 3.0;
    s.cavs[0].sample_size_bits = 2.0;
    const double r = achievable_rate(1.0, 1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(sample_count(Matrix::Constant(1, 2, 1.0), Matrix::Constant(1, 2, 1.0), s, 0), 3.0 * r / 2.0);
    EXPECT_THROW(sample_count(Matrix::Constant(1, 2, 1.0), Matrix::Constant(1, 2, 1.0), s, 1), std::out_of_range);
}

TEST(SampleCount, MonotoneInEveryEntry) {
    const Scenario s = fixtures::demo_scenario(4, 3);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Matrix u(2, 4), p(2, 4);
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            u(j) = rng.uniform(0.0, 1e7);
            p(j) = rng.uniform(0.0, 1.0);
        }
        const auto k = static_cast<Eigen::Index>(i % 2);
        const auto n = static_cast<Eigen::Index>(i % 4);
        Matrix u2 = u, p2 = p;
        u2(k, n) *= 1.5;
        p2(k, n) *= 1.5;
        EXPECT_GE(sample_count(u2, p, s, static_cast<std::size_t>(k)), sample_count(u, p, s, static_cast<std::size_t>(k)));
        EXPECT_GE(sample_count(u, p2, s, static_cast<std::size_t>(k)), sample_count(u, p, s, static_cast<std::size_t>(k)));
    }
}

TEST(PerceptionError, Examples) {
    EXPECT_DOUBLE_EQ(perception_error(2.0, {1.0, 1.0}), 0.5);
    EXPECT_DOUBLE_EQ(perception_error(4.0, {2.0, 0.5}), 1.0);
    EXPECT_DOUBLE_EQ(perception_error(1.0, {3.7, 0.21}), 3.7);
    EXPECT_TRUE(std::isinf(perception_error(0.0, {1.0, 1.0})));
    EXPECT_TRUE(std::isinf(perception_error(-1.0, {1.0, 1.0})));
}

TEST(Objective, Examples) {
    // K=1 with v = 2, a = b = 1.
    const auto c = fixtures::cav(Modality::Image, 1.0, 10.0, 1.0, 1.0);
    Scenario s = fixtures::unit_scenario(Matrix::Constant(1, 1, 1.0), {c});
    EXPECT_DOUBLE_EQ(objective(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0), s), 0.5);

    // K=2 with v = (1, 1): each term contributes a / K.
    s = fixtures::unit_scenario(Matrix::Constant(2, 1, 1.0),
                                {fixtures::cav(Modality::Image, 1.0, 1.0, 1.0, 0.3),
                                 fixtures::cav(Modality::PointCloud, 1.0, 1.0, 1.0, 0.7)});
    EXPECT_DOUBLE_EQ(objective(Matrix::Constant(2, 1, 1.0), Matrix::Constant(2, 1, 1.0), s), 1.0);

    Matrix p = Matrix::Constant(2, 1, 1.0);
    p(1, 0) = 0.0;
    EXPECT_TRUE(std::isinf(objective(Matrix::Constant(2, 1, 1.0), p, s)));
    EXPECT_THROW(objective(Matrix::Constant(2, 2, 1.0), p, s), DomainError);
}

TEST(Objective, WeightAppliedOnce) {
    const Scenario s = fixtures::demo_scenario(6, 9, 3);
    const Allocation a = equal_split(s);
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) sum += perception_error(sample_count(a, s, k), s.cavs[k].curve) / 3.0;
    EXPECT_NEAR(objective(a, s), sum, 1e-15 * sum);
    EXPECT_NEAR(objective(a, s), fixtures::direct_objective(a.bandwidth, a.power, s), 1e-12 * sum);
}

TEST(Objective, ConvexAlongFeasibleSegments) {
    const Scenario s = fixtures::demo_scenario(3, 4);
    Rng rng(21);
    auto random_alloc = [&] {
        Allocation a{Matrix(2, 3), Matrix(2, 3)};
        for (Eigen::Index n = 0; n < 3; ++n) {
            const double x = rng.uniform(0.05, 0.95);
            a.bandwidth(0, n) = x * s.total_bandwidth_hz;
            a.bandwidth(1, n) = (1 - x) * s.total_bandwidth_hz;
            a.power(0, n) = rng.uniform(0.01, 1.0);
            a.power(1, n) = rng.uniform(0.01, 1.0);
        }
        return a;
    };
    for (int i = 0; i < 500; ++i) {
        const Allocation a = random_alloc(), b = random_alloc();
        const double t = rng.uniform();
        const double mid = objective(t * a.bandwidth + (1 - t) * b.bandwidth, t * a.power + (1 - t) * b.power, s);
        EXPECT_LE(mid, t * objective(a, s) + (1 - t) * objective(b, s) + 1e-9);
    }
}

TEST(Feasibility, Examples) {
    const Scenario s = fixtures::demo_scenario(4, 1);
    Allocation a{Matrix::Constant(2, 4, s.total_bandwidth_hz / 2), Matrix::Zero(2, 4)};
    EXPECT_TRUE(check_feasibility(a, s, 1e-9).feasible);

    Allocation over = a;
    over.power(0, 0) = 4.0 * s.cavs[0].power_cap_watts + 1.0;
    const FeasibilityReport r = check_feasibility(over, s, 1e-9);
    EXPECT_FALSE(r.feasible);
    EXPECT_NEAR(r.per_cav_power_violation(0), 1.0 / 4.0, 1e-12);

    Allocation half = a;
    half.bandwidth.col(2) /= 2.0;
    const FeasibilityReport h = check_feasibility(half, s, 1e-9);
    EXPECT_FALSE(h.feasible);
    EXPECT_NEAR(h.per_slot_bandwidth_violation(2), -s.total_bandwidth_hz / 2, 1e-6);
}

TEST(Scenario, ValidateRejectsBadInput) {
    Scenario s = fixtures::demo_scenario(2, 1);
    s.reduced_gains(0, 1) = 0.0;
    EXPECT_THROW(s.validate(), DomainError);
    s = fixtures::demo_scenario(2, 1);
    s.cavs[1].curve.exponent = 0.0;
    EXPECT_THROW(s.validate(), DomainError);
    s = fixtures::demo_scenario(2, 1);
    s.reduced_gains = Matrix::Ones(2, 3);
    EXPECT_THROW(s.validate(), DomainError);
}

TEST(Objective, AmplitudeScaling) {
    const Scenario s = fixtures::demo_scenario(8, 2);
    Scenario scaled = s;
    for (auto& c : scaled.cavs) c.curve.amplitude *= 3.0;
    const SolveResult a = solve(s), b = solve(scaled);
    EXPECT_NEAR(b.objective, 3.0 * a.objective, 1e-9 * b.objective);
    const double bw = s.total_bandwidth_hz, pw = s.total_power_watts;
    EXPECT_LE((a.allocation.bandwidth - b.allocation.bandwidth).cwiseAbs().maxCoeff(), 1e-6 * bw);
    EXPECT_LE((a.allocation.power - b.allocation.power).cwiseAbs().maxCoeff(), 1e-6 * pw);
}
