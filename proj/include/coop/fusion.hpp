// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Track-to-track fusion: alignment (spatial transform + constant-velocity
// prediction), association (distance/IoU gating + optimal assignment) and a
// Kalman update where each observation acts as a measurement of the global
// track. The same path serves intra-agent sensor fusion and inter-agent
// fusion of received messages.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coop/core.hpp"
#include "coop/cpm.hpp"
#include "coop/geometry.hpp"
#include "coop/sensor_frame.hpp"

namespace coop {

struct FusionConfig {
  double dist_gate_m = 2.0;
  double iou_gate = 0.1;
  // Class-evidence exponent per source, indexed by Source.
  std::array<double, kNumSources> class_weight = {1.0, 0.5, 2.0, 2.0, 1.0};
  // Shape priority per source, higher wins: LiDAR, then cameras, then radar.
  std::array<int, kNumSources> shape_priority = {3, 1, 2, 2, 0};
  // Radar velocity measurements enter with covariance / velocity_weight.
  double velocity_weight = 4.0;
  double existence_publish_threshold = 0.5;
  double existence_decay_per_second = 0.3;
  double track_drop_threshold = 0.05;
  double radar_default_height_m = 1.5;
  double radar_z_variance = 10.0;
  double nms_iou = 0.5;
  double q_accel = 1.0;
  double max_staleness_s = 1.0;
  // Tracks without any update for longer than this are removed.
  double max_coast_s = 1.5;
  double trust_floor = 0.05;
  // Nominal interval between messages from one remote sender.
  double remote_period_s = 0.1;

  // Throws InvariantViolation when a field is outside its valid range.
  void Validate() const;
};

class StaleTrack : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Constant-velocity prediction of state and covariance to `t`, with
// white-noise acceleration of spectral density q_accel^2. Throws StaleTrack
// when |t - obj.stamp| exceeds max_staleness_s.
TrackedObject PredictTo(const TrackedObject& obj, Timestamp t, double q_accel,
                        double max_staleness_s = 1.0);

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_a;
  std::vector<int> unmatched_b;
};

// Planar distance and BEV IoU gating; optimal assignment of cost
// distance - dist_gate_m * iou over admissible pairs.
AssociationResult Associate(std::span<const TrackedObject> a,
                            std::span<const TrackedObject> b,
                            const FusionConfig& cfg);

// Kalman update of `global` with `obs` as a direct measurement (H = I,
// R = obs.cov). Throws InvariantViolation for non-PSD covariances.
TrackedObject FusePair(const TrackedObject& global, const TrackedObject& obs,
                       const FusionConfig& cfg);

// Exponent-weighted product of class evidence. Exposed for tests.
ClassDistribution FuseClasses(const ClassDistribution& global, double global_weight,
                              const ClassDistribution& obs, double obs_weight);
double ClassWeight(SourceMask sources, const FusionConfig& cfg);

// Observation with confidence c: p <- 1 - (1-p)(1-c). Miss: p decays
// exponentially over dt_s.
TrackedObject UpdateExistence(const TrackedObject& track,
                              std::optional<double> observed_confidence,
                              double dt_s, const FusionConfig& cfg);

struct TrackEntry {
  TrackedObject obj;
  std::uint32_t misses = 0;
  Timestamp last_update;
  // Set while the track is known only through messages from this agent.
  std::optional<std::uint32_t> remote_sender;
};

// One agent's global track set in the world frame. Single writer.
class TrackTable {
 public:
  const std::map<std::uint32_t, TrackEntry>& tracks() const { return tracks_; }
  std::map<std::uint32_t, TrackEntry>& tracks() { return tracks_; }
  std::size_t size() const { return tracks_.size(); }

  // Assigns a fresh id to `obj` and stores it.
  std::uint32_t Insert(TrackedObject obj, Timestamp now,
                       std::optional<std::uint32_t> remote_sender = std::nullopt);
  // Predicts every track to `t` (tracks already at `t` are untouched).
  void PredictAll(Timestamp t, const FusionConfig& cfg);
  // Removes tracks without an update for more than max_coast_s.
  void DropCoasted(Timestamp t, const FusionConfig& cfg);

  std::uint64_t stale_messages() const { return stale_messages_; }
  void CountStaleMessage() { ++stale_messages_; }

  // Newest frame stamp consumed per sensor; older or repeated frames are skipped.
  std::map<std::uint32_t, Timestamp>& last_frame() { return last_frame_; }

 private:
  std::map<std::uint32_t, TrackEntry> tracks_;
  std::map<std::uint32_t, Timestamp> last_frame_;
  std::uint32_t next_id_ = 1;
  std::uint64_t stale_messages_ = 0;
};

// Tracks with existence >= threshold, in id order. Tracks below the drop
// threshold are erased from the table.
std::vector<TrackedObject> Publish(TrackTable& table, const FusionConfig& cfg);

// Lifts a BEV radar object to 3D with the default height. Sensor frame.
TrackedObject RadarLift(const RadarObject& bev, Timestamp stamp, const FusionConfig& cfg);

// Greedy class-aware non-maximum suppression. Ties in score keep the smaller id.
std::vector<Detection2D> NmsMerge2d(std::span<const Detection2D> boxes, double nms_iou);

struct SensorInfo {
  std::uint32_t sensor_id = 0;
  Modality modality = Modality::kLidar;
  // Mount pose in the agent frame.
  AgentPose mount;
  double fov_rad = kTwoPi;
  double max_range_m = 100.0;
  // Per-detection confidence that feeds existence.
  double confidence = 0.5;
  double frame_period_s = 0.1;
  std::optional<CameraModel> camera;
  // Monitor trust weight in [0, 1].
  double trust = 1.0;

  // Whether a point given in the agent frame lies inside the field of view.
  bool Covers(const Vec3& p_agent) const;
};

using SensorRig = std::map<std::uint32_t, SensorInfo>;

// One fusion step for one agent: every frame is aligned to the table,
// associated, fused; unmatched detections are born as tentative tracks and
// unobserved tracks inside the sensor's field of view decay. `agent_pose` is
// the agent's world pose used for all frames. Throws InvariantViolation for
// frames from another agent or from sensors missing in `rig`.
std::vector<TrackedObject> IntraFuseStep(TrackTable& table,
                                         std::span<const SensorFrame> frames,
                                         const AgentPose& agent_pose,
                                         const SensorRig& rig,
                                         const FusionConfig& cfg, Timestamp t);

// Fuses a received message into `table`. Messages older than
// max_staleness_s are dropped and counted.
std::vector<TrackedObject> InterFuseStep(TrackTable& table, const cpm::CpmMessage& remote,
                                         const AgentPose& ego_pose,
                                         const FusionConfig& cfg, Timestamp t);

}  // namespace coop
