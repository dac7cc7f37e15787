// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Synthetic ground truth and per-modality sensor models. The simulator emits
// object-level detections directly; it never synthesizes points or pixels.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coop/core.hpp"
#include "coop/geometry.hpp"
#include "coop/netsim.hpp"
#include "coop/rng.hpp"
#include "coop/sensor_frame.hpp"

namespace coop {

inline constexpr int kScenarioSchemaVersion = 1;
// Simulation tick; every sensor period must be a multiple of it.
inline constexpr std::int64_t kTickMicros = 10'000;

// Constant speed, constant turn rate over `duration_s`; `turn_rad` is the
// total heading change across the segment.
struct Segment {
  double duration_s = 0.0;
  double speed_mps = 0.0;
  double turn_rad = 0.0;
};

struct KinematicState {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  Vec3 velocity = Vec3::Zero();
};

// Piecewise motion from a start pose. Past the last segment the mover keeps
// going straight at the final speed.
struct Trajectory {
  Vec3 start = Vec3::Zero();
  double start_heading = 0.0;
  std::vector<Segment> segments;

  KinematicState At(double t_s) const;
};

struct Actor {
  std::uint32_t id = 0;
  ObjectClass cls = ObjectClass::kCar;
  Vec3 dims = Vec3(4.5, 1.8, 1.5);
  Trajectory trajectory;
};

enum class FaultType : std::uint8_t { kBlockage, kBroken, kFrozen, kDropout };
std::string_view ToString(FaultType f);
std::optional<FaultType> ParseFaultType(std::string_view name);
// Detection-probability multiplier for a fault (1 for Frozen/Dropout).
double FaultDetectionMultiplier(FaultType f);

// Active on [start, end).
struct FaultInterval {
  std::uint32_t sensor_id = 0;
  FaultType fault = FaultType::kBlockage;
  Timestamp start;
  Timestamp end;
};

struct SensorNoise {
  double pos_m = 0.1;
  double vel_mps = 0.2;
  double dim_m = 0.05;
  double heading_rad = 0.03;
  double pixel = 2.0;
};

enum class Illumination : std::uint8_t { kDay, kNight };

struct SensorModel {
  std::uint32_t sensor_id = 0;
  Modality modality = Modality::kLidar;
  // Mount pose in the agent frame.
  AgentPose mount;
  double fov_rad = kTwoPi;
  double max_range_m = 80.0;
  double detection_prob = 0.9;
  SensorNoise noise;
  double class_confusion = 0.05;
  // Argmax probability attached to each reported label.
  double class_confidence = 0.8;
  // Detection-probability multiplier at night.
  double illumination_sensitivity = 1.0;
  double frame_rate_hz = 10.0;
  // Per-detection confidence consumed by existence updates in fusion.
  double confidence = 0.6;
  std::int64_t phase_micros = 0;
  std::optional<CameraModel> camera;

  std::int64_t period_micros() const;
  bool FiresAt(Timestamp t) const;
};

// Default night multiplier for a modality (RGB degrades, thermal barely).
double DefaultIlluminationSensitivity(Modality m);

enum class AgentKind : std::uint8_t { kVehicle, kInfrastructure };

struct AgentSpec {
  std::uint32_t id = 0;
  AgentKind kind = AgentKind::kVehicle;
  Trajectory trajectory;
  std::vector<SensorModel> sensors;

  AgentPose PoseAt(Timestamp t) const;
};

struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::uint64_t seed = 0;
  double duration_s = 10.0;
  Illumination illumination = Illumination::kDay;
  std::uint32_t ego_agent = 0;
  double eval_radius_m = 60.0;
  ChannelConfig channel;
  std::vector<Actor> actors;
  std::vector<AgentSpec> agents;
  std::vector<FaultInterval> faults;

  // Throws ScenarioError naming the offending element.
  void Validate() const;
  const AgentSpec& agent(std::uint32_t id) const;
  std::optional<FaultType> ActiveFault(std::uint32_t sensor_id, Timestamp t) const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundTruthActor {
  std::uint32_t id = 0;
  ObjectClass cls = ObjectClass::kCar;
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  Vec3 velocity = Vec3::Zero();
  Vec3 dims = Vec3::Ones();
};

// Exact kinematic state of every actor at `t`, in actor-id order. Never
// consumes randomness. Throws std::out_of_range outside [0, duration].
std::vector<GroundTruthActor> WorldAt(const ScenarioConfig& scn, Timestamp t);

// Whether the straight segment from `from` to `to` crosses the footprint of
// `box` shrunk to 90% of its half-extents.
bool RayBlocked(const Vec2& from, const Vec2& to, const BevBox& box);

// One frame of `sensor` mounted on the agent at `agent_pose`. Applies the
// Blockage/Broken detection multipliers from the fault schedule; Frozen and
// Dropout need frame history and are handled by SensorSimulator.
SensorFrame Sense(const ScenarioConfig& scn, const SensorModel& sensor,
                  const AgentPose& agent_pose, Timestamp t, Rng& rng);

// Stateful wrapper owning a sensor's random substream and last frame.
class SensorSimulator {
 public:
  SensorSimulator(SensorModel model, std::uint64_t seed);

  const SensorModel& model() const { return model_; }
  // nullopt when the sensor is in Dropout. A Frozen sensor repeats its last
  // frame verbatim.
  std::optional<SensorFrame> Step(const ScenarioConfig& scn, const AgentPose& agent_pose,
                                  Timestamp t);

 private:
  SensorModel model_;
  Rng rng_;
  std::optional<SensorFrame> last_;
};

ScenarioConfig LoadScenario(const std::filesystem::path& path);
ScenarioConfig ParseScenario(std::string_view json_text);

// CSV rows: t,actor_id,x,y,z,heading,vx,vy,class
void WriteGroundTruthHeader(std::ostream& os);
void WriteGroundTruthRows(std::ostream& os, Timestamp t,
                          const std::vector<GroundTruthActor>& actors);

}  // namespace coop
