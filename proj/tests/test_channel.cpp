#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "rbsched/channel.hpp"

using namespace rbsched;

namespace {

double db(double x) { return 10.0 * std::log10(x); }

// Independent capacity scan over the raw efficiency list.
int cqi_oracle(double sinr) {
    const double eff[] = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
                          2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
    const double cap = std::log2(1.0 + sinr);
    int best = 0;
    for (int q = 1; q <= 15; ++q)
        if (eff[q - 1] <= cap) best = q;
    return best;
}

}  // namespace

TEST(Channel, FreeSpaceConstant) {
    ChannelParams p;
    // 20 log10(c / (4 pi d0 fc)) evaluated by hand: c/(4pi*10*1e9) = 2.38572e-3
    EXPECT_NEAR(free_space_constant_db(p), -52.44756, 1e-4);
    EXPECT_NEAR(free_space_constant_db(p), -52.44, 0.01);

    ChannelParams unity;
    unity.ref_distance_m = 1.0;
    unity.carrier_freq_hz = kSpeedOfLight / (4.0 * M_PI);
    EXPECT_NEAR(free_space_constant_db(unity), 0.0, 1e-12);

    ChannelParams twice = p;
    twice.ref_distance_m = 20.0;
    EXPECT_NEAR(free_space_constant_db(p) - free_space_constant_db(twice), 20.0 * std::log10(2.0), 1e-12);
}

TEST(Channel, PathGainAtFixedDistance) {
    ChannelParams p;
    EXPECT_NEAR(path_gain_db(p, 10.0, 0.0), -52.44756, 1e-4);
    EXPECT_NEAR(path_gain_db(p, 100.0, 0.0), -87.44756, 1e-4);
    EXPECT_NEAR(path_gain_db(p, 100.0, 3.0) - path_gain_db(p, 100.0, 0.0), 3.0, 1e-12);
}

TEST(Channel, LargeScaleStatistics) {
    ChannelParams p;
    Rng rng(7);
    const int n = 100000;
    double sum = 0, sq = 0, dmin = 1e9, dmax = 0;
    for (int i = 0; i < n; ++i) {
        auto s = sample_large_scale(p, rng);
        // strip the deterministic path loss to isolate shadowing
        const double x = s.gain_db - path_gain_db(p, s.distance_m, 0.0);
        sum += x;
        sq += x * x;
        dmin = std::min(dmin, s.distance_m);
        dmax = std::max(dmax, s.distance_m);
        ASSERT_GT(s.gain, 0.0);
        ASSERT_NEAR(db(s.gain), s.gain_db, 1e-9);
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(sd, 5.2, 0.1);
    EXPECT_NEAR(mean, 0.0, 0.1);
    EXPECT_GE(dmin, p.dist_min_m);
    EXPECT_LT(dmax, p.dist_max_m);
}

TEST(Channel, NoisePower) {
    ChannelParams p;
    const double thermal = 1.380649e-23 * 300.0 * 180e3;
    EXPECT_NEAR(thermal, 7.455e-16, 1e-19);
    EXPECT_NEAR(noise_power_w(p), thermal * std::pow(10.0, 0.9), 1e-27);
    EXPECT_NEAR(noise_power_w(p), 5.92e-15, 0.01e-15);
    EXPECT_NEAR(db(noise_power_w(p)) + 30.0, -112.3, 0.05);

    ChannelParams nf0 = p;
    nf0.noise_figure_db = 0.0;
    EXPECT_NEAR(noise_power_w(nf0), thermal, 1e-28);

    ChannelParams half = p;
    half.rb_bandwidth_hz /= 2;
    EXPECT_NEAR(noise_power_w(half), noise_power_w(p) / 2, 1e-28);
}

TEST(Channel, SinrExample) {
    ChannelParams p;
    const double gain = std::pow(10.0, path_gain_db(p, 10.0, 0.0) / 10.0);
    EXPECT_NEAR(gain, 5.7e-6, 0.01e-6);
    const double s = sinr(p, std::sqrt(gain));
    EXPECT_NEAR(s, (0.1 / 6.0) * gain / noise_power_w(p), 1e-6 * s);
    EXPECT_NEAR(s, 1.6e7, 0.02e7);
    // computes to 72.05 dB
    EXPECT_NEAR(db(s), 72.05, 0.01);
    EXPECT_EQ(CqiTable::lte().from_sinr(s), 15);

    EXPECT_EQ(sinr(p, 0.0), 0.0);
    ChannelParams r12 = p;
    r12.num_rbs = 12;
    EXPECT_NEAR(sinr(r12, 1e-3), sinr(p, 1e-3) / 2, 1e-12);
}

TEST(Channel, CqiThresholds) {
    const auto& t = CqiTable::lte();
    EXPECT_EQ(t.from_sinr(0.0), 0);
    EXPECT_EQ(t.from_sinr(std::pow(2.0, 2.59) - 1.0), 9);
    EXPECT_EQ(t.from_sinr(1.6e7), 15);
    EXPECT_DOUBLE_EQ(cqi_to_se(0, t), 0.0);
    EXPECT_DOUBLE_EQ(cqi_to_se(15, t), 5.5547);
    EXPECT_DOUBLE_EQ(cqi_to_se(9, t), 2.4063);
    EXPECT_THROW(cqi_to_se(16, t), std::out_of_range);
    EXPECT_THROW(cqi_to_se(-1, t), std::out_of_range);
}

TEST(Channel, CqiMatchesScanAndStaysBelowCapacity) {
    const auto& t = CqiTable::lte();
    Rng rng(3);
    std::uniform_real_distribution<double> u(-20.0, 80.0);
    int prev = 0;
    double prev_sinr = 0.0;
    std::vector<double> grid;
    for (int i = 0; i < 20000; ++i) grid.push_back(std::pow(10.0, u(rng) / 10.0));
    std::sort(grid.begin(), grid.end());
    for (double s : grid) {
        const int q = t.from_sinr(s);
        ASSERT_EQ(q, cqi_oracle(s)) << s;
        ASSERT_LE(t.efficiency(q), std::log2(1.0 + s));
        ASSERT_GE(q, prev) << prev_sinr << " -> " << s;
        prev = q;
        prev_sinr = s;
    }
}

TEST(Channel, DeliverableBits) {
    ChannelParams p;
    const auto& t = CqiTable::lte();
    EXPECT_EQ(deliverable_bits(15, p, t), 999);
    EXPECT_EQ(deliverable_bits(0, p, t), 0);
    EXPECT_EQ(deliverable_bits(1, p, t), 27);
    for (int q = 0; q <= 15; ++q) EXPECT_EQ(deliverable_bits(q, p, t), static_cast<int>(180.0 * t.efficiency(q)));
}

TEST(Channel, CqiTableValidation) {
    std::array<double, 16> bad{};
    EXPECT_THROW(CqiTable{bad}, std::invalid_argument);
    auto good = CqiTable::lte().efficiencies();
    good[0] = 0.1;
    EXPECT_THROW(CqiTable{good}, std::invalid_argument);
}

TEST(Channel, ParamsValidation) {
    ChannelParams p;
    p.corr_param = 1.5;
    try {
        p.validate();
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("channel.corr_param"), std::string::npos);
    }
    p = ChannelParams{};
    p.dist_min_m = 200;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = ChannelParams{};
    p.coherence_steps = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(SmallScale, IdentityAndRankOneLimits) {
    ChannelParams p;
    p.corr_param = 0.0;
    SmallScaleSampler iid(p);
    EXPECT_TRUE(iid.sqrt_covariance().isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-12));

    p.corr_param = 1.0;
    SmallScaleSampler one(p);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        auto z = one.sample(rng);
        for (int k = 1; k < 6; ++k) ASSERT_NEAR(std::abs(z[k] - z[0]), 0.0, 1e-9);
    }
}

TEST(SmallScale, SqrtSquaresBackToPhi) {
    for (double w : {0.001, 0.3, 0.5, 0.9}) {
        ChannelParams p;
        p.corr_param = w;
        SmallScaleSampler s(p);
        const auto& r = s.sqrt_covariance();
        EXPECT_TRUE((r * r).isApprox(s.covariance(), 1e-10));
        EXPECT_TRUE(r.isApprox(r.transpose(), 1e-12));
        for (int m = 0; m < 6; ++m)
            for (int l = 0; l < 6; ++l) EXPECT_DOUBLE_EQ(s.covariance()(m, l), std::pow(w, std::abs(m - l)));
    }
}

class SmallScaleCovariance : public ::testing::TestWithParam<double> {};

TEST_P(SmallScaleCovariance, MonteCarloMatchesPhi) {
    ChannelParams p;
    p.corr_param = GetParam();
    SmallScaleSampler s(p);
    Rng rng(11);
    const int n = 100000;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(6, 6);
    for (int i = 0; i < n; ++i) {
        auto z = s.sample(rng);
        for (int m = 0; m < 6; ++m)
            for (int l = 0; l < 6; ++l) acc(m, l) += z[m] * std::conj(z[l]);
    }
    acc /= n;
    for (int m = 0; m < 6; ++m) {
        EXPECT_NEAR(acc(m, m).real(), 1.0, 0.02);
        for (int l = 0; l < 6; ++l) {
            EXPECT_NEAR(acc(m, l).real(), std::pow(GetParam(), std::abs(m - l)), 0.02) << m << "," << l;
            EXPECT_NEAR(acc(m, l).imag(), 0.0, 0.02);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Omega, SmallScaleCovariance, ::testing::Values(0.001, 0.5));

TEST(LinkModel, BitsConstantWithinCoherence) {
    LinkModel m{ChannelParams{}};
    Rng rng(9);
    auto link = m.draw_link(rng);
    std::vector<int> a, b;
    m.fill_bits(link, a);
    m.fill_bits(link, b);
    EXPECT_EQ(a, b);
    EXPECT_EQ(link.small_scale.size(), 6u);
    EXPECT_GT(link.large_scale, 0.0);
    for (int k = 0; k < 6; ++k) {
        EXPECT_EQ(a[k], m.rb_bits(link, k));
        EXPECT_EQ(m.rb_cqi(link, k), cqi_oracle(m.rb_sinr(link, k)));
    }
    const double l0 = link.large_scale;
    m.redraw_small_scale(link, rng);
    EXPECT_EQ(link.large_scale, l0);
    EXPECT_EQ(link.age, 0);
    EXPECT_EQ(m.max_bits(), 999);
}
