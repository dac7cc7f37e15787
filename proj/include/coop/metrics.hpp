// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Detection and tracking metrics: AP50, AR100, AMOTA and AMOTP per class.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "coop/core.hpp"
#include "coop/geometry.hpp"

namespace coop::metrics {

struct EvalPrediction {
  std::uint32_t track_id = 0;
  ObjectClass cls = ObjectClass::kCar;
  BevBox box;
  Vec2 position = Vec2::Zero();
  double score = 0.0;
};

struct EvalGroundTruth {
  std::uint32_t actor_id = 0;
  ObjectClass cls = ObjectClass::kCar;
  BevBox box;
  Vec2 position = Vec2::Zero();
};

struct EvalFrame {
  Timestamp stamp;
  std::vector<EvalPrediction> preds;
  std::vector<EvalGroundTruth> gts;
};

struct MatchConfig {
  double iou_threshold = 0.5;
  // Pedestrians match on center distance instead of IoU.
  double pedestrian_distance_m = 1.0;
};

// Indices refer to the unfiltered prediction and ground-truth lists.
struct FrameMatch {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> distances;
};

// Greedy matching for one class: predictions in descending score order
// (ties by index) each take the best unmatched ground truth that passes the
// class criterion.
FrameMatch MatchFrame(std::span<const EvalPrediction> preds, std::span<const EvalGroundTruth> gts,
                      ObjectClass cls, const MatchConfig& cfg = {});

// nullopt when the class has no ground truth in any frame.
std::optional<double> Ap50(std::span<const EvalFrame> frames, ObjectClass cls,
                           const MatchConfig& cfg = {});
std::optional<double> Ar100(std::span<const EvalFrame> frames, ObjectClass cls,
                            const MatchConfig& cfg = {}, std::size_t max_per_frame = 100);

struct TrackingScore {
  double amota = 0.0;
  // nullopt when no recall target is reached.
  std::optional<double> amotp;
};

// MOTAR for one operating point; clamped to [0, 1].
double Motar(int ids, int fp, int fn, double recall, int num_gt);

std::optional<TrackingScore> AmotaAmotp(std::span<const EvalFrame> frames, ObjectClass cls,
                                        int n_thresholds = 40, const MatchConfig& cfg = {});

enum class Pipeline : std::uint8_t { kVehicle, kIntra, kInter };
std::string_view ToString(Pipeline p);
std::optional<Pipeline> ParsePipeline(std::string_view name);

inline constexpr std::array<ObjectClass, 3> kEvaluatedClasses = {
    ObjectClass::kCar, ObjectClass::kCyclist, ObjectClass::kPedestrian};

struct ClassMetrics {
  std::optional<double> ap50;
  std::optional<double> ar100;
  std::optional<double> amota;
  std::optional<double> amotp;
};

using PipelineMetrics = std::map<ObjectClass, ClassMetrics>;
using EvalReport = std::map<Pipeline, PipelineMetrics>;

PipelineMetrics Evaluate(std::span<const EvalFrame> frames, const MatchConfig& cfg = {});

// CSV: pipeline,class,metric,value with "NA" for absent values.
void WriteReportCsv(std::ostream& os, const EvalReport& report);
// JSON with the same rows; absent values are null.
void WriteReportJson(std::ostream& os, const EvalReport& report);

}  // namespace coop::metrics
