#include <gtest/gtest.h>

#include <cmath>

#include "rbsched/agent.hpp"
#include "rbsched/environment.hpp"

using namespace rbsched;

namespace {

std::vector<int> full_bits() { return std::vector<int>(6, 999); }

Environment quiet_env(EnvConfig cfg = {}, std::uint64_t seed = 1) {
    Environment env(cfg, seed);
    env.reset();
    env.clear_arrivals();
    return env;
}

}  // namespace

TEST(Environment, StateDimension) {
    EXPECT_EQ(Environment::state_dim(10, 6), 97);
    EXPECT_EQ(Environment::state_dim(40, 6), 367);
    for (int L : {1, 5, 10, 40})
        for (int R : {1, 3, 6, 12}) {
            EnvConfig cfg;
            cfg.buffer_len = L;
            cfg.channel.num_rbs = R;
            Environment env(cfg, 1);
            EXPECT_EQ(static_cast<int>(env.reset().size()), (R + 3) * L + R + 1);
        }
}

TEST(Environment, ResetIsEmptyExceptPsi) {
    auto env = quiet_env();
    auto raw = env.raw_state();
    for (std::size_t i = 0; i + 1 < raw.size(); ++i) EXPECT_EQ(raw[i], 0.0) << i;
    EXPECT_EQ(raw.back(), 1.0);
    auto enc = env.encode_state();
    for (std::size_t i = 0; i + 1 < enc.size(); ++i) EXPECT_EQ(enc[i], 0.0f) << i;
    EXPECT_FLOAT_EQ(enc.back(), 1.0f / 6.0f);
    EXPECT_EQ(env.psi(), 1);
}

TEST(Environment, EncodeLayout) {
    auto env = quiet_env();
    env.place_request(2, 1, 150, 3200, full_bits());
    env.set_continuity({2, 0, 0, 0, 0, 0});
    auto raw = env.raw_state();
    const int block = 9;
    EXPECT_EQ(raw[2 * block + 0], 1);
    EXPECT_EQ(raw[2 * block + 1], 150);
    EXPECT_EQ(raw[2 * block + 2], 3200);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(raw[2 * block + 3 + k], 999);
    EXPECT_EQ(raw[90], 2);
    EXPECT_EQ(raw[96], 1);

    auto enc = env.encode_state();
    EXPECT_FLOAT_EQ(enc[2 * block + 0], 1.0f);
    EXPECT_FLOAT_EQ(enc[2 * block + 1], 1.0f);
    EXPECT_FLOAT_EQ(enc[2 * block + 2], 1.0f);
    EXPECT_FLOAT_EQ(enc[2 * block + 3], 1.0f);
    EXPECT_FLOAT_EQ(enc[90], 2.0f / 64.0f);
    for (int i = 0; i < 2 * block; ++i) EXPECT_EQ(enc[i], 0.0f);
}

TEST(Environment, PsiStepChangesOneCoordinate) {
    auto env = quiet_env();
    env.place_request(0, 2, 200, 64000, full_bits());
    auto before = env.encode_state();
    auto out = env.step(0);
    ASSERT_EQ(before.size(), out.next_state.size());
    int changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != out.next_state[i];
    EXPECT_EQ(changed, 1);
    EXPECT_NE(before.back(), out.next_state.back());
}

TEST(Environment, ZeroActionLeavesBufferAlone) {
    auto env = quiet_env();
    env.place_request(0, 2, 200, 64000, full_bits());
    auto out = env.step(0);
    EXPECT_EQ(out.info.delivered_bits, 0);
    EXPECT_FALSE(out.info.invalid);
    EXPECT_FALSE(env.current_mask()[0]);
    EXPECT_EQ(env.buffer()[0].remaining_bits, 64000);
    EXPECT_EQ(env.spectral_efficiency(0), 0.0);
}

TEST(Environment, PartialDeliveryFreesSlot) {
    auto env = quiet_env();
    env.place_request(0, 1, 150, 500, full_bits());
    EXPECT_EQ(env.deliverable_bits_now(1), 500);
    auto out = env.step(1);
    EXPECT_EQ(out.info.delivered_bits, 500);
    ASSERT_TRUE(out.info.satisfied.has_value());
    EXPECT_EQ(out.info.satisfied->service, 1);
    EXPECT_FALSE(env.buffer()[0].occupied);
    EXPECT_TRUE(env.current_mask()[0]);
}

TEST(Environment, InvalidAction) {
    auto env = quiet_env();
    for (int j = 0; j < 3; ++j) env.place_request(j, 1, 150, 3200, full_bits());
    EXPECT_TRUE(env.is_invalid(7));
    auto out = env.step(7);
    EXPECT_TRUE(out.info.invalid);
    EXPECT_EQ(out.reward, -1.0);
    EXPECT_EQ(out.info.delivered_bits, 0);
    EXPECT_FALSE(env.current_mask()[0]);
}

TEST(Environment, SpectralEfficiencyValues) {
    auto env = quiet_env();
    env.place_request(0, 3, 300, 200000, full_bits());
    env.place_request(1, 1, 150, 180, full_bits());
    EXPECT_DOUBLE_EQ(env.spectral_efficiency(1), 5.55);
    EXPECT_DOUBLE_EQ(env.spectral_efficiency(2), 1.0);
    EXPECT_DOUBLE_EQ(env.spectral_efficiency(0), 0.0);
    EXPECT_DOUBLE_EQ(env.spectral_efficiency(5), 0.0);
    EXPECT_DOUBLE_EQ(env.se_max(), 5.55);
}

TEST(Environment, EmptyBufferRewardIsZero) {
    auto env = quiet_env();
    for (int a = 0; a <= 10; ++a) {
        auto out = env.step(a % 11);
        EXPECT_EQ(out.reward, 0.0);
        EXPECT_TRUE(out.info.buffer_was_empty);
        EXPECT_FALSE(out.info.invalid);
    }
}

TEST(Environment, HandBuiltTimeStepReward) {
    EnvConfig cfg;
    cfg.reward = {2.0, 2.0, 1.0};
    auto env = quiet_env(cfg);
    for (int j = 0; j < 4; ++j) env.place_request(j, 3, 150, 200000, full_bits());
    env.set_continuity({0, 0, 0, 0, 1, 1});
    const int actions[6] = {1, 2, 3, 4, 0, 0};
    for (int k = 0; k < 5; ++k) EXPECT_EQ(env.step(actions[k]).reward, 0.0);
    EXPECT_DOUBLE_EQ(env.r1(), 4.0);
    auto last = env.step(actions[5]);
    const double expect = (1.0 / 6.0) * (2.0 * 4.0 + 2.0 * 2.0) * (1.0 - std::exp(-0.5));
    EXPECT_NEAR(last.reward, expect, 1e-12);
    EXPECT_NEAR(last.reward, 0.7869, 1e-4);
    EXPECT_EQ(last.info.continuity, (std::vector<int>{0, 0, 0, 0, 2, 2}));
}

TEST(Environment, InvalidOnFinalRbAddsAggregate) {
    EnvConfig cfg;
    auto env = quiet_env(cfg);
    env.place_request(0, 3, 300, 200000, full_bits());
    for (int k = 0; k < 5; ++k) env.step(1);
    auto last = env.step(9);
    EXPECT_TRUE(last.info.invalid);
    EXPECT_NEAR(last.reward, -1.0 + 5.0 / 6.0, 1e-12);
}

TEST(Environment, InfiniteDeltaGivesUnitLatencyFactor) {
    auto env = quiet_env();
    env.place_request(0, 1, 1, 3200, full_bits());  // about to miss
    for (int k = 0; k < 5; ++k) env.step(0);
    auto last = env.step(1);
    EXPECT_NEAR(last.reward, (999.0 / 180.0 / 5.55) / 6.0, 1e-12);
}

TEST(Environment, MissedRequestIsRemovedAndLedgered) {
    auto env = quiet_env();
    env.place_request(0, 2, 1, 64000 - 999, full_bits());
    for (int k = 0; k < 5; ++k) env.step(0);
    auto last = env.step(0);
    ASSERT_EQ(last.info.missed.size(), 1u);
    EXPECT_EQ(last.info.missed[0].delivered_bits, 999);
    EXPECT_EQ(env.total_missed_bits(), 999);
    EXPECT_FALSE(env.buffer()[0].occupied);
}

TEST(Environment, ContinuityUpdate) {
    auto env = quiet_env();
    env.place_request(0, 3, 300, 200000, full_bits());
    env.set_continuity({1, 1, 1, 1, 1, 1});
    const int actions[6] = {1, 0, 1, 0, 0, 1};
    StepOutcome out;
    for (int a : actions) out = env.step(a);
    EXPECT_EQ(out.info.continuity, (std::vector<int>{0, 2, 0, 2, 2, 0}));
    EXPECT_EQ(out.info.mask, (std::vector<bool>{true, false, true, false, false, true}));
}

TEST(Environment, ContinuityFunction) {
    EXPECT_EQ(continuity_function(2, 2), 1);
    EXPECT_EQ(continuity_function(1, 2), 0);
    for (int c = 1; c < 10; ++c) EXPECT_EQ(continuity_function(0, c), 0);
    // the snapshot v = [1, 1, ..., 2] qualifies only on the last RB for C = 2
    std::vector<int> v = {1, 1, 1, 1, 1, 2};
    for (int k = 0; k < 6; ++k) EXPECT_EQ(continuity_function(v[k], 2), k == 5 ? 1 : 0);
}

TEST(Environment, Errors) {
    Environment env(EnvConfig{}, 1);
    EXPECT_THROW(env.step(0), std::logic_error);  // not reset
    env.reset();
    EXPECT_THROW(env.step(11), std::out_of_range);
    EXPECT_THROW(env.step(-1), std::out_of_range);
    EnvConfig cfg;
    cfg.steps_per_episode = 1;
    Environment one(cfg, 1);
    one.reset();
    for (int k = 0; k < 5; ++k) EXPECT_FALSE(one.step(0).terminal);
    EXPECT_TRUE(one.step(0).terminal);
    EXPECT_THROW(one.step(0), std::logic_error);

    EnvConfig bad;
    bad.buffer_len = 0;
    EXPECT_THROW(Environment(bad, 1), std::invalid_argument);
    bad = EnvConfig{};
    bad.reward.delta = 0;
    EXPECT_THROW(Environment(bad, 1), std::invalid_argument);
}

// Random-policy episodes checked against the invariants the model promises.
class EnvironmentProperties : public ::testing::TestWithParam<int> {};

TEST_P(EnvironmentProperties, Invariants) {
    EnvConfig cfg;
    cfg.steps_per_episode = 200;
    cfg.reward = {1.5, 2.5, 1.0};
    const int seed = GetParam();
    Environment env(cfg, seed);
    RandomPolicy random(seed);
    MaxThroughputPolicy mt;
    const int R = 6;
    for (int episode = 0; episode < 3; ++episode) {
        env.reset();
        std::vector<std::vector<int>> bits_at_start(cfg.buffer_len);
        bool done = false;
        long i = 0;
        std::vector<int> v_prev = env.continuity();
        while (!done) {
            Policy& p = (episode % 2) ? static_cast<Policy&>(mt) : random;
            const int rb = env.current_rb();
            ASSERT_EQ(rb, static_cast<int>(i % R));
            const auto before = env.buffer();
            const int a = p.select(env);
            auto out = env.step(a);
            ++i;
            const auto& info = out.info;
            ASSERT_EQ(static_cast<int>(out.next_state.size()), env.state_dim());

            // reward truth table
            if (info.buffer_was_empty) {
                ASSERT_EQ(out.reward, 0.0);
            } else if (!info.time_step_finished) {
                ASSERT_EQ(out.reward, info.invalid ? -1.0 : 0.0);
            } else {
                ASSERT_LT(out.reward, cfg.reward.alpha + cfg.reward.beta);
                ASSERT_GE(out.reward, info.invalid ? -1.0 : 0.0);
            }

            // v moves only at boundaries
            if (!info.time_step_finished) {
                ASSERT_EQ(env.continuity(), v_prev);
            }
            v_prev = env.continuity();

            for (const auto& e : env.buffer()) {
                if (!e.occupied) continue;
                ASSERT_EQ(e.delivered_bits + e.remaining_bits, e.pdu_bits);
                ASSERT_GE(e.ttl, 1);
                ASSERT_LE(e.ttl, e.max_latency);
                ASSERT_GT(e.remaining_bits, 0);
            }
            if (info.satisfied) {
                const auto& s = before[info.satisfied->slot];
                ASSERT_EQ(s.delivered_bits + info.delivered_bits, s.pdu_bits);
            }
            if (info.time_step_finished) {
                ASSERT_EQ(info.arrivals, info.admitted + info.dropped);
                if (info.dropped > 0) ASSERT_EQ(env.occupied_count(), cfg.buffer_len);
            }
            // t only changes at coherence boundaries (or when a slot turns over)
            if (!info.time_step_finished || env.time_step() % cfg.channel.coherence_steps != 0) {
                for (int j = 0; j < cfg.buffer_len; ++j) {
                    const auto& b = before[j];
                    const auto& e = env.buffer()[j];
                    if (b.occupied && e.occupied && b.admitted_step == e.admitted_step && b.service == e.service)
                        ASSERT_EQ(b.bits, e.bits);
                }
            }
            done = out.terminal;
        }
        ASSERT_EQ(i, 200L * R);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EnvironmentProperties, ::testing::Values(1, 2, 3, 4, 5));

TEST(Environment, SameSeedSameEpisode) {
    Environment a(EnvConfig{}, 42), b(EnvConfig{}, 42);
    MaxThroughputPolicy mt;
    a.reset();
    b.reset();
    for (int i = 0; i < 3000; ++i) {
        auto oa = a.step(mt.select(a));
        auto ob = b.step(mt.select(b));
        ASSERT_EQ(oa.next_state, ob.next_state);
        ASSERT_EQ(oa.reward, ob.reward);
    }
}
