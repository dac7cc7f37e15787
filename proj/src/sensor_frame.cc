// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/sensor_frame.hpp"

namespace coop {

std::string_view ToString(Modality m) {
  switch (m) {
    case Modality::kLidar: return "lidar";
    case Modality::kRadar: return "radar";
    case Modality::kRgb: return "rgb";
    case Modality::kThermal: return "thermal";
  }
  return "?";
}

std::optional<Modality> ParseModality(std::string_view name) {
  for (Modality m : {Modality::kLidar, Modality::kRadar, Modality::kRgb, Modality::kThermal}) {
    if (ToString(m) == name) return m;
  }
  return std::nullopt;
}

Source ToSource(Modality m) {
  switch (m) {
    case Modality::kLidar: return Source::kLidar;
    case Modality::kRadar: return Source::kRadar;
    case Modality::kRgb: return Source::kRgb;
    case Modality::kThermal: return Source::kThermal;
  }
  return Source::kLidar;
}

bool RadarObject::operator==(const RadarObject& o) const {
  return id == o.id && box.center == o.box.center && box.length == o.box.length &&
         box.width == o.box.width && box.heading == o.box.heading &&
         velocity == o.velocity && class_dist == o.class_dist &&
         sigma_pos == o.sigma_pos && sigma_vel == o.sigma_vel &&
         heading_sigma == o.heading_sigma;
}

bool SensorFrame::operator==(const SensorFrame& o) const {
  return sensor_id == o.sensor_id && agent_id == o.agent_id &&
         modality == o.modality && stamp == o.stamp && objects == o.objects &&
         radar == o.radar && boxes == o.boxes;
}

}  // namespace coop
