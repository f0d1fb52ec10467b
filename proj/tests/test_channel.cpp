// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "qot/channel.hpp"
#include "qot/reference.hpp"

#include <gtest/gtest.h>

using namespace qot;

TEST(Pathloss, Examples) {
    EXPECT_DOUBLE_EQ(pathloss_gain(1.0, 30.0, 0.0), 1e-3);
    EXPECT_NEAR(pathloss_gain(10.0, 30.0, 2.0), 1e-5, 1e-20);
    EXPECT_NEAR(pathloss_gain(1.0, 30.0, 3.0), 1e-3, 1e-18);
}

TEST(GenerateRawGains, DeterministicAndInRange) {
    ChannelConfig cfg;
    cfg.num_bs = 3;
    cfg.seed = 99;
    const RawGains a = generate_raw_gains(cfg, 2, 50);
    const RawGains b = generate_raw_gains(cfg, 2, 50);
    ASSERT_EQ(a.num_bs(), 3u);
    const double hi = pathloss_gain(cfg.min_distance_m, cfg.pathloss_ref_db, cfg.pathloss_exponent);
    const double lo = pathloss_gain(cfg.max_distance_m, cfg.pathloss_ref_db, cfg.pathloss_exponent);
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_EQ(a.per_bs[l], b.per_bs[l]);
        EXPECT_LE(a.per_bs[l].maxCoeff(), hi);
        EXPECT_GE(a.per_bs[l].minCoeff(), lo);
    }
    cfg.seed = 100;
    EXPECT_NE(generate_raw_gains(cfg, 2, 50).per_bs[0], a.per_bs[0]);
}

TEST(GenerateRawGains, HoldKeepsDistanceAcrossSlots) {
    ChannelConfig cfg;
    cfg.num_bs = 2;
    cfg.hold_distance_slots = 4;
    const RawGains raw = generate_raw_gains(cfg, 2, 8);
    for (const Matrix& h : raw.per_bs)
        for (Eigen::Index k = 0; k < 2; ++k) {
            EXPECT_EQ(h(k, 0), h(k, 3));
            EXPECT_EQ(h(k, 4), h(k, 7));
            EXPECT_NE(h(k, 3), h(k, 4));
        }
}

TEST(GenerateRawGains, RayleighFadingHasUnitMean) {
    ChannelConfig cfg;
    cfg.num_bs = 1;
    cfg.min_distance_m = 10.0;
    cfg.max_distance_m = 10.0 + 1e-9;
    cfg.fading = Fading::Rayleigh;
    const RawGains raw = generate_raw_gains(cfg, 1, 20000);
    const double base = pathloss_gain(10.0, cfg.pathloss_ref_db, cfg.pathloss_exponent);
    EXPECT_NEAR(raw.per_bs[0].mean() / base, 1.0, 0.03);
}

TEST(ReduceAssociation, Examples) {
    RawGains one{{Matrix::Constant(2, 3, 0.25)}};
    auto [map1, g1] = reduce_association(one);
    EXPECT_EQ(map1.assoc.maxCoeff(), 0);
    EXPECT_EQ(g1, one.per_bs[0]);

    RawGains two{{Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.8)}};
    auto [map2, g2] = reduce_association(two);
    EXPECT_EQ(map2.assoc(0, 0), 1);
    EXPECT_EQ(g2(0, 0), 0.8);

    RawGains tie{{Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 0.7)}};
    auto [map3, g3] = reduce_association(tie);
    EXPECT_EQ(map3.assoc(0, 0), 0);
    EXPECT_EQ(g3(0, 0), 0.7);
}

TEST(ReduceAssociation, DominatesEverySlice) {
    ChannelConfig cfg;
    cfg.num_bs = 5;
    cfg.fading = Fading::Rayleigh;
    const RawGains raw = generate_raw_gains(cfg, 3, 40);
    const auto [map, reduced] = reduce_association(raw);
    for (std::size_t l = 0; l < raw.num_bs(); ++l) EXPECT_TRUE((reduced.array() >= raw.per_bs[l].array()).all());
    for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index n = 0; n < 40; ++n)
            EXPECT_EQ(reduced(k, n), raw.per_bs[static_cast<std::size_t>(map.assoc(k, n))](k, n));
}

TEST(AverageGains, Examples) {
    EXPECT_DOUBLE_EQ(average_gains(Matrix::Constant(1, 5, 0.3))(0), 0.3);
    Matrix row(1, 2);
    row << 1.0, 3.0;
    EXPECT_DOUBLE_EQ(average_gains(row)(0), 2.0);
    Matrix col(3, 1);
    col << 1.0, 2.0, 4.0;
    EXPECT_EQ(average_gains(col), Vector(col.col(0)));
}

// The best association is never beaten by a fixed alternative map.
TEST(ReduceAssociation, ArgmaxMapIsOptimal) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ChannelConfig cfg;
        cfg.num_bs = 2;
        cfg.seed = seed;
        const RawGains raw = generate_raw_gains(cfg, 2, 2);
        Scenario s = fixtures::demo_scenario(2, seed, 2, 2);
        s.reduced_gains = reduce_association(raw).second;
        const double best = reference_solve(s, 2000, 1).objective;
        for (int mask = 0; mask < 16; ++mask) {
            Scenario alt = s;
            for (int bit = 0; bit < 4; ++bit)
                alt.reduced_gains(bit / 2, bit % 2) = raw.per_bs[static_cast<std::size_t>((mask >> bit) & 1)](bit / 2, bit % 2);
            EXPECT_LE(best, reference_solve(alt, 2000, 1).objective * (1 + 1e-9)) << "seed " << seed << " mask " << mask;
        }
    }
}
