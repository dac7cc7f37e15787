// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/monitor.hpp"

#include <cstdio>
#include <string>

namespace coop {

std::string_view ToString(Health h) {
  switch (h) {
    case Health::kHealthy: return "Healthy";
    case Health::kDegraded: return "Degraded";
    case Health::kBlocked: return "Blocked";
    case Health::kFailed: return "Failed";
  }
  return "?";
}

double TrustFor(Health h) {
  switch (h) {
    case Health::kHealthy: return 1.0;
    case Health::kDegraded: return 0.5;
    case Health::kBlocked: return 0.2;
    case Health::kFailed: return 0.0;
  }
  return 0.0;
}

void MonitorConfig::Validate() const {
  if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) throw std::invalid_argument("ema_alpha outside (0,1)");
  if (window == 0 || baseline_frames == 0) throw std::invalid_argument("window sizes must be > 0");
  if (!(blocked_ratio < degraded_ratio)) throw std::invalid_argument("blocked_ratio >= degraded_ratio");
}

Monitor::Monitor(MonitorConfig cfg) : cfg_(cfg) { cfg_.Validate(); }

Monitor::Sensor& Monitor::Get(std::uint32_t sensor_id) {
  auto it = sensors_.find(sensor_id);
  if (it == sensors_.end()) throw std::out_of_range("unknown sensor " + std::to_string(sensor_id));
  return it->second;
}

const Monitor::Sensor& Monitor::Get(std::uint32_t sensor_id) const {
  auto it = sensors_.find(sensor_id);
  if (it == sensors_.end()) throw std::out_of_range("unknown sensor " + std::to_string(sensor_id));
  return it->second;
}

void Monitor::RegisterSensor(std::uint32_t sensor_id, Duration period, Timestamp start) {
  if (period.micros <= 0) throw std::invalid_argument("sensor period must be > 0");
  Sensor s;
  s.stats.period = period;
  s.stats.last_frame_time = start;
  s.state.since = start;
  sensors_[sensor_id] = std::move(s);
}

void Monitor::Observe(std::uint32_t sensor_id, const std::optional<SensorFrame>& frame, Timestamp t) {
  Sensor& s = Get(sensor_id);
  StreamStats& st = s.stats;
  if (st.last_observe && t < *st.last_observe) {
    throw std::logic_error("monitor time went backwards for sensor " + std::to_string(sensor_id));
  }
  st.last_observe = t;
  ++s.frames_in_state;
  if (!frame) return;

  st.gaps.push_back((t - st.last_frame_time).seconds());
  if (st.gaps.size() > cfg_.window) st.gaps.pop_front();
  st.last_frame_time = t;

  if (st.last_frame && *st.last_frame == *frame) {
    ++st.identical;
  } else {
    st.identical = 0;
  }
  st.last_frame = *frame;

  const double count = static_cast<double>(frame->detection_count());
  st.ema = st.frames == 0 ? count : cfg_.ema_alpha * count + (1.0 - cfg_.ema_alpha) * st.ema;
  ++st.frames;
  if (!st.baseline) {
    st.baseline_sum += count;
    if (st.frames >= cfg_.baseline_frames) st.baseline = st.baseline_sum / static_cast<double>(st.frames);
    return;
  }
  st.below_blocked = st.ema < cfg_.blocked_ratio * *st.baseline ? st.below_blocked + 1 : 0;
  st.below_degraded = st.ema < cfg_.degraded_ratio * *st.baseline ? st.below_degraded + 1 : 0;
}

HealthState Monitor::Classify(std::uint32_t sensor_id, Timestamp t) {
  Sensor& s = Get(sensor_id);
  const StreamStats& st = s.stats;
  if (!st.baseline) return s.state;

  Health raw = Health::kHealthy;
  const double silent = static_cast<double>((t - st.last_frame_time).micros);
  if (silent > cfg_.failed_periods * static_cast<double>(st.period.micros)) {
    raw = Health::kFailed;
  } else if (st.below_blocked >= cfg_.low_rate_frames || st.identical >= cfg_.frozen_frames) {
    raw = Health::kBlocked;
  } else if (st.below_degraded >= cfg_.low_rate_frames) {
    raw = Health::kDegraded;
  }

  const bool toward_healthy = raw < s.state.state;
  if (raw == s.state.state || (toward_healthy && s.frames_in_state < cfg_.hysteresis_frames)) {
    return s.state;
  }
  transitions_.push_back({t, sensor_id, s.state.state, raw});
  s.state = HealthState{raw, TrustFor(raw), t};
  s.frames_in_state = 0;
  return s.state;
}

double Monitor::TrustWeight(std::uint32_t sensor_id) const { return Get(sensor_id).state.trust; }

const StreamStats& Monitor::stats(std::uint32_t sensor_id) const { return Get(sensor_id).stats; }

void WriteHealthLogHeader(std::ostream& os) { os << "t,sensor_id,old,new\n"; }

void WriteHealthLogRows(std::ostream& os, const std::vector<HealthTransition>& rows) {
  char line[128];
  for (const HealthTransition& r : rows) {
    std::snprintf(line, sizeof(line), "%.3f,%u,%s,%s\n", r.t.seconds(), r.sensor_id,
                  std::string(ToString(r.from)).c_str(), std::string(ToString(r.to)).c_str());
    os << line;
  }
}

}  // namespace coop
