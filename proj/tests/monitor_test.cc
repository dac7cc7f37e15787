// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "coop/monitor.hpp"
#include "coop/rng.hpp"

namespace coop {
namespace {

constexpr std::uint32_t kSensor = 7;
constexpr std::int64_t kPeriod = 100'000;

SensorFrame FrameWith(std::size_t n, Timestamp t) {
  SensorFrame f;
  f.sensor_id = kSensor;
  f.stamp = t;
  f.objects.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.objects[i].id = static_cast<std::uint32_t>(i);
  return f;
}

class MonitorFixture : public ::testing::Test {
 protected:
  MonitorFixture() { monitor.RegisterSensor(kSensor, Duration{kPeriod}, Timestamp()); }

  // Feeds one frame per period with a binomial count; returns the state.
  Health Feed(double p, int n = 30) {
    const Timestamp t(next);
    next += kPeriod;
    std::size_t count = 0;
    for (int i = 0; i < n; ++i) count += rng.Bernoulli(p);
    monitor.Observe(kSensor, FrameWith(count, t), t);
    return monitor.Classify(kSensor, t).state;
  }

  Monitor monitor;
  Rng rng{17};
  std::int64_t next = 0;
};

TEST_F(MonitorFixture, HealthyStreamStaysHealthy) {
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(Feed(0.9), Health::kHealthy) << i;
  EXPECT_TRUE(monitor.transitions().empty());
  EXPECT_EQ(monitor.TrustWeight(kSensor), 1.0);
}

TEST_F(MonitorFixture, BlockageDetectedWithinBound) {
  for (int i = 0; i < 150; ++i) Feed(0.9);
  int detected_at = -1;
  for (int i = 0; i < 200 && detected_at < 0; ++i) {
    if (Feed(0.9 * 0.43) == Health::kBlocked) detected_at = i;
  }
  ASSERT_GE(detected_at, 0);
  EXPECT_GE(detected_at, 19);
  EXPECT_LE(detected_at, 70);
  EXPECT_EQ(monitor.TrustWeight(kSensor), 0.2);
}

TEST_F(MonitorFixture, BrokenBecomesDegraded) {
  for (int i = 0; i < 150; ++i) Feed(0.9, 40);
  Health h = Health::kHealthy;
  for (int i = 0; i < 150 && h == Health::kHealthy; ++i) h = Feed(0.9 * 0.83, 40);
  EXPECT_EQ(h, Health::kDegraded);
  EXPECT_EQ(monitor.TrustWeight(kSensor), 0.5);
}

TEST_F(MonitorFixture, IdenticalFramesCountedAndFrozenIsBlocked) {
  for (int i = 0; i < 150; ++i) Feed(0.9);
  const SensorFrame frozen = FrameWith(20, Timestamp(next));
  int blocked_at = -1;
  for (int i = 0; i < 15; ++i) {
    const Timestamp t(next);
    next += kPeriod;
    monitor.Observe(kSensor, frozen, t);
    EXPECT_EQ(monitor.stats(kSensor).identical, static_cast<std::size_t>(i));
    if (blocked_at < 0 && monitor.Classify(kSensor, t).state == Health::kBlocked) blocked_at = i;
  }
  EXPECT_EQ(blocked_at, 10);
}

TEST_F(MonitorFixture, SilenceIsFailed) {
  for (int i = 0; i < 150; ++i) Feed(0.9);
  Health h = Health::kHealthy;
  int k = 0;
  for (; k < 30 && h != Health::kFailed; ++k) {
    const Timestamp t(next);
    next += kPeriod;
    monitor.Observe(kSensor, std::nullopt, t);
    h = monitor.Classify(kSensor, t).state;
  }
  EXPECT_EQ(h, Health::kFailed);
  EXPECT_EQ(k, 11);
  EXPECT_EQ(monitor.TrustWeight(kSensor), 0.0);
}

TEST_F(MonitorFixture, RecoveryWaitsForHysteresis) {
  for (int i = 0; i < 150; ++i) Feed(0.9);
  for (int i = 0; i < 30; ++i) {
    const Timestamp t(next);
    next += kPeriod;
    monitor.Observe(kSensor, std::nullopt, t);
    monitor.Classify(kSensor, t);
  }
  ASSERT_EQ(monitor.Classify(kSensor, Timestamp(next - kPeriod)).state, Health::kFailed);
  int recovered_at = -1;
  for (int i = 0; i < 40 && recovered_at < 0; ++i) {
    if (Feed(0.9) != Health::kFailed) recovered_at = i;
  }
  // 30 silent observations already count toward time in state, so the first
  // frame ends the failure. Recovery never skips past the hysteresis window.
  EXPECT_GE(recovered_at, 0);
  const auto& tr = monitor.transitions();
  ASSERT_GE(tr.size(), 2u);
  EXPECT_EQ(tr[0].to, Health::kFailed);
  EXPECT_EQ(tr[1].from, Health::kFailed);
}

TEST_F(MonitorFixture, NoFlappingUnderBorderlineRate) {
  for (int i = 0; i < 150; ++i) Feed(0.9);
  for (int i = 0; i < 2000; ++i) Feed(0.9 * 0.9);
  const auto& tr = monitor.transitions();
  for (std::size_t i = 1; i < tr.size(); ++i) {
    if (tr[i].to < tr[i].from) {
      // Every move toward Healthy was preceded by at least the hysteresis window.
      EXPECT_GE((tr[i].t - tr[i - 1].t).micros, 10 * kPeriod);
    }
  }
}

TEST_F(MonitorFixture, Errors) {
  EXPECT_THROW(monitor.Observe(99, std::nullopt, Timestamp()), std::out_of_range);
  EXPECT_THROW(monitor.Classify(99, Timestamp()), std::out_of_range);
  monitor.Observe(kSensor, std::nullopt, Timestamp(500'000));
  EXPECT_THROW(monitor.Observe(kSensor, std::nullopt, Timestamp(400'000)), std::logic_error);
}

TEST(MonitorConfigTest, Validate) {
  MonitorConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.ema_alpha = 1.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = MonitorConfig{};
  c.blocked_ratio = 0.95;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(HealthTest, TrustTable) {
  EXPECT_EQ(TrustFor(Health::kHealthy), 1.0);
  EXPECT_EQ(TrustFor(Health::kDegraded), 0.5);
  EXPECT_EQ(TrustFor(Health::kBlocked), 0.2);
  EXPECT_EQ(TrustFor(Health::kFailed), 0.0);
  EXPECT_EQ(ToString(Health::kBlocked), "Blocked");
}

TEST(HealthLogTest, Format) {
  std::ostringstream os;
  WriteHealthLogHeader(os);
  WriteHealthLogRows(os, {{Timestamp(12'340'000), 201, Health::kHealthy, Health::kBlocked}});
  EXPECT_EQ(os.str(), "t,sensor_id,old,new\n12.340,201,Healthy,Blocked\n");
}

}  // namespace
}  // namespace coop
