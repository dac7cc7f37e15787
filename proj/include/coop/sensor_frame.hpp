// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "coop/core.hpp"
#include "coop/geometry.hpp"

namespace coop {

enum class Modality : std::uint8_t { kLidar, kRadar, kRgb, kThermal };

std::string_view ToString(Modality m);
std::optional<Modality> ParseModality(std::string_view name);
Source ToSource(Modality m);
inline bool IsCamera(Modality m) {
  return m == Modality::kRgb || m == Modality::kThermal;
}

// Radar object lists are bird's-eye-view only; height is never measured.
struct RadarObject {
  std::uint32_t id = 0;
  BevBox box;
  Vec2 velocity = Vec2::Zero();
  ClassDistribution class_dist;
  double sigma_pos = 0.5;
  double sigma_vel = 0.1;
  double heading_sigma = 0.1;

  bool operator==(const RadarObject& o) const;
};

struct Detection2D {
  std::uint32_t id = 0;
  Box2D box;
  double score = 0.0;
  ObjectClass label = ObjectClass::kUnknown;
  Source source = Source::kRgb;

  bool operator==(const Detection2D& o) const = default;
};

// One modality's detection batch at one instant, in the sensor frame.
// Exactly one of the payload vectors is used, selected by `modality`.
struct SensorFrame {
  std::uint32_t sensor_id = 0;
  std::uint32_t agent_id = 0;
  Modality modality = Modality::kLidar;
  Timestamp stamp;
  std::vector<TrackedObject> objects;
  std::vector<RadarObject> radar;
  std::vector<Detection2D> boxes;

  std::size_t detection_count() const {
    return objects.size() + radar.size() + boxes.size();
  }
  bool operator==(const SensorFrame& o) const;
};

}  // namespace coop
