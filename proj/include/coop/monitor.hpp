// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Rule-based sensor health classification from frame-stream statistics.

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "coop/core.hpp"
#include "coop/sensor_frame.hpp"

namespace coop {

enum class Health : std::uint8_t { kHealthy = 0, kDegraded, kBlocked, kFailed };
std::string_view ToString(Health h);
// Healthy 1.0, Degraded 0.5, Blocked 0.2, Failed 0.0.
double TrustFor(Health h);

struct HealthState {
  Health state = Health::kHealthy;
  double trust = 1.0;
  Timestamp since;

  bool operator==(const HealthState&) const = default;
};

struct MonitorConfig {
  double ema_alpha = 0.1;
  std::size_t window = 50;
  std::size_t baseline_frames = 100;
  double failed_periods = 10.0;
  double blocked_ratio = 0.55;
  double degraded_ratio = 0.9;
  int low_rate_frames = 20;
  int frozen_frames = 10;
  int hysteresis_frames = 10;

  void Validate() const;
};

struct StreamStats {
  Duration period;
  std::size_t frames = 0;
  double ema = 0.0;
  double baseline_sum = 0.0;
  std::optional<double> baseline;
  // Inter-frame gaps in seconds over the last `window` frames.
  std::deque<double> gaps;
  // Frames equal to their predecessor, reset by any differing frame.
  int identical = 0;
  int below_blocked = 0;
  int below_degraded = 0;
  std::optional<SensorFrame> last_frame;
  Timestamp last_frame_time;
  std::optional<Timestamp> last_observe;
};

struct HealthTransition {
  Timestamp t;
  std::uint32_t sensor_id = 0;
  Health from = Health::kHealthy;
  Health to = Health::kHealthy;
};

// One instance per agent. Not thread-safe.
class Monitor {
 public:
  explicit Monitor(MonitorConfig cfg = {});

  // `start` anchors the no-frame timer until the first frame arrives.
  void RegisterSensor(std::uint32_t sensor_id, Duration period, Timestamp start = Timestamp());

  // nullopt records a missing frame. Throws std::logic_error when t moves
  // backwards for this sensor and std::out_of_range for an unknown sensor.
  void Observe(std::uint32_t sensor_id, const std::optional<SensorFrame>& frame, Timestamp t);

  // Throws std::out_of_range for an unknown sensor.
  HealthState Classify(std::uint32_t sensor_id, Timestamp t);

  double TrustWeight(std::uint32_t sensor_id) const;
  const StreamStats& stats(std::uint32_t sensor_id) const;
  const std::vector<HealthTransition>& transitions() const { return transitions_; }
  const MonitorConfig& config() const { return cfg_; }

 private:
  struct Sensor {
    StreamStats stats;
    HealthState state;
    int frames_in_state = 0;
  };

  Sensor& Get(std::uint32_t sensor_id);
  const Sensor& Get(std::uint32_t sensor_id) const;

  MonitorConfig cfg_;
  std::map<std::uint32_t, Sensor> sensors_;
  std::vector<HealthTransition> transitions_;
};

void WriteHealthLogHeader(std::ostream& os);
void WriteHealthLogRows(std::ostream& os, const std::vector<HealthTransition>& rows);

}  // namespace coop
