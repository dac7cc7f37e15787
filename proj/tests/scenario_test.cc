// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "coop/scenario.hpp"

namespace coop {
namespace {

Actor StaticActor(std::uint32_t id, ObjectClass cls, double x, double y, Vec3 dims = Vec3(4.5, 1.8, 1.5)) {
  Actor a;
  a.id = id;
  a.cls = cls;
  a.dims = dims;
  a.trajectory.start = Vec3(x, y, 0);
  return a;
}

SensorModel Lidar(std::uint32_t id) {
  SensorModel s;
  s.sensor_id = id;
  s.modality = Modality::kLidar;
  s.detection_prob = 0.9;
  s.class_confusion = 0.0;
  return s;
}

ScenarioConfig OneSensorScenario(SensorModel sensor) {
  ScenarioConfig scn;
  scn.name = "unit";
  scn.seed = 5;
  scn.duration_s = 200.0;
  scn.ego_agent = 1;
  AgentSpec agent;
  agent.id = 1;
  agent.kind = AgentKind::kInfrastructure;
  agent.sensors.push_back(sensor);
  scn.agents.push_back(agent);
  return scn;
}

TEST(TrajectoryTest, Examples) {
  Trajectory tr;
  tr.start = Vec3(1, 2, 0);
  tr.start_heading = 0.0;
  tr.segments = {{2.0, 5.0, 0.0}, {3.0, 2.0, kPi / 2}};
  EXPECT_TRUE(tr.At(0.0).position.isApprox(Vec3(1, 2, 0)));
  EXPECT_NEAR(tr.At(1.0).position.x(), 6.0, 1e-12);
  EXPECT_TRUE(tr.At(1.0).velocity.isApprox(Vec3(5, 0, 0)));
  const KinematicState mid = tr.At(3.5);
  EXPECT_NEAR(mid.heading, kPi / 4, 1e-12);
  // Circular arc of radius v / omega.
  const double omega = (kPi / 2) / 3.0;
  const double r = 2.0 / omega;
  EXPECT_NEAR(mid.position.x(), 11.0 + r * std::sin(kPi / 4), 1e-9);
  EXPECT_NEAR(mid.position.y(), 2.0 + r * (1 - std::cos(kPi / 4)), 1e-9);
  const KinematicState end = tr.At(5.0);
  EXPECT_NEAR(end.heading, kPi / 2, 1e-12);
  const KinematicState after = tr.At(6.0);
  EXPECT_NEAR(after.position.y() - end.position.y(), 2.0, 1e-9);
  EXPECT_NEAR(after.position.x(), end.position.x(), 1e-9);
}

TEST(TrajectoryTest, StationaryStaysPut) {
  Trajectory tr;
  tr.start = Vec3(3, 4, 0);
  tr.start_heading = 1.0;
  for (double t : {0.0, 5.0, 100.0}) {
    EXPECT_TRUE(tr.At(t).position.isApprox(Vec3(3, 4, 0)));
    EXPECT_EQ(tr.At(t).heading, 1.0);
  }
}

TEST(WorldAtTest, SortedAndBounded) {
  ScenarioConfig scn = OneSensorScenario(Lidar(10));
  scn.duration_s = 1.0;
  scn.actors = {StaticActor(5, ObjectClass::kCar, 10, 0), StaticActor(2, ObjectClass::kPedestrian, 5, 0,
                                                                       Vec3(0.6, 0.6, 1.8))};
  const auto gt = WorldAt(scn, Timestamp(500'000));
  ASSERT_EQ(gt.size(), 2u);
  EXPECT_EQ(gt[0].id, 2u);
  EXPECT_NEAR(gt[0].position.z(), 0.9, 1e-12);
  EXPECT_THROW(WorldAt(scn, Timestamp(1'000'001)), std::out_of_range);
  EXPECT_NO_THROW(WorldAt(scn, Timestamp(1'000'000)));
}

TEST(RayBlockedTest, Examples) {
  const BevBox truck{Vec2(5, 0), 10.0, 2.5, 0.0};
  EXPECT_TRUE(RayBlocked(Vec2(5, -10), Vec2(5, 10), truck));
  EXPECT_FALSE(RayBlocked(Vec2(5, -10), Vec2(5, -5), truck));
  EXPECT_FALSE(RayBlocked(Vec2(-10, 5), Vec2(20, 5), truck));
  // Grazing the outer 10% of the footprint does not block.
  EXPECT_FALSE(RayBlocked(Vec2(9.7, -10), Vec2(9.7, 10), truck));
}

TEST(SenseTest, TruckOccludesPedestrianForLidarNotRadar) {
  SensorModel lidar = Lidar(10);
  lidar.detection_prob = 1.0;
  ScenarioConfig scn = OneSensorScenario(lidar);
  scn.actors = {StaticActor(1, ObjectClass::kCar, 10, 0, Vec3(3, 12, 3.5)),
                StaticActor(2, ObjectClass::kPedestrian, 20, 0, Vec3(0.6, 0.6, 1.8)),
                StaticActor(3, ObjectClass::kCar, -15, 0)};
  Rng rng(1);
  const AgentPose pose = scn.agents[0].PoseAt(Timestamp());
  for (int i = 0; i < 50; ++i) {
    const SensorFrame f = Sense(scn, lidar, pose, Timestamp(), rng);
    ASSERT_EQ(f.objects.size(), 2u);
    for (const TrackedObject& o : f.objects) EXPECT_NE(o.label(), ObjectClass::kPedestrian);
  }
  SensorModel radar = lidar;
  radar.modality = Modality::kRadar;
  for (int i = 0; i < 50; ++i) EXPECT_EQ(Sense(scn, radar, pose, Timestamp(), rng).radar.size(), 3u);
}

TEST(SenseTest, RangeAndFov) {
  SensorModel lidar = Lidar(10);
  lidar.detection_prob = 1.0;
  lidar.max_range_m = 30.0;
  lidar.fov_rad = kPi / 2;
  ScenarioConfig scn = OneSensorScenario(lidar);
  scn.actors = {StaticActor(1, ObjectClass::kCar, 25, 0), StaticActor(2, ObjectClass::kCar, 35, 0),
                StaticActor(3, ObjectClass::kCar, 0, 20)};
  Rng rng(2);
  const SensorFrame f = Sense(scn, lidar, scn.agents[0].PoseAt(Timestamp()), Timestamp(), rng);
  ASSERT_EQ(f.objects.size(), 1u);
  EXPECT_NEAR(f.objects[0].position.x(), 25.0, 1.0);
}

double DetectionRate(ScenarioConfig scn, const SensorModel& s, int frames, std::uint64_t seed) {
  Rng rng(seed);
  const AgentPose pose = scn.agents[0].PoseAt(Timestamp());
  std::size_t hits = 0;
  for (int i = 0; i < frames; ++i) {
    hits += Sense(scn, s, pose, Timestamp(i * 100'000), rng).detection_count();
  }
  return static_cast<double>(hits) / (frames * static_cast<double>(scn.actors.size()));
}

std::vector<Actor> Ring(int n, double radius) {
  std::vector<Actor> out;
  for (int i = 0; i < n; ++i) {
    const double a = kTwoPi * i / n;
    out.push_back(StaticActor(100 + i, ObjectClass::kCar, radius * std::cos(a), radius * std::sin(a),
                              Vec3(1, 1, 1.5)));
  }
  return out;
}

TEST(SenseTest, NightFavorsThermal) {
  SensorModel rgb = Lidar(10);
  rgb.modality = Modality::kRgb;
  rgb.illumination_sensitivity = DefaultIlluminationSensitivity(Modality::kRgb);
  SensorModel thermal = rgb;
  thermal.modality = Modality::kThermal;
  thermal.illumination_sensitivity = DefaultIlluminationSensitivity(Modality::kThermal);
  ScenarioConfig scn = OneSensorScenario(Lidar(10));
  scn.illumination = Illumination::kNight;
  // Lidar model stands in for both cameras' visibility: 360 deg, count objects.
  SensorModel rgb_vis = Lidar(10);
  rgb_vis.illumination_sensitivity = rgb.illumination_sensitivity;
  SensorModel th_vis = Lidar(10);
  th_vis.illumination_sensitivity = thermal.illumination_sensitivity;
  scn.actors = Ring(10, 20);
  const double r_rgb = DetectionRate(scn, rgb_vis, 1000, 3);
  const double r_th = DetectionRate(scn, th_vis, 1000, 3);
  EXPECT_GE(r_th, r_rgb);
  EXPECT_NEAR(r_rgb, 0.9 * 0.79, 0.01);
  EXPECT_NEAR(r_th, 0.9 * 0.98, 0.01);
}

TEST(SenseTest, BlockageAndBrokenScaleRate) {
  SensorModel lidar = Lidar(10);
  ScenarioConfig scn = OneSensorScenario(lidar);
  scn.actors = Ring(10, 20);
  const double clear = DetectionRate(scn, lidar, 1000, 4);
  scn.faults = {{10, FaultType::kBlockage, Timestamp(), Timestamp(200'000'000)}};
  const double blocked = DetectionRate(scn, lidar, 1000, 4);
  scn.faults[0].fault = FaultType::kBroken;
  const double broken = DetectionRate(scn, lidar, 1000, 4);
  EXPECT_NEAR(clear, 0.9, 0.01);
  EXPECT_NEAR(blocked / clear, 0.43, 0.02);
  EXPECT_NEAR(broken / clear, 0.83, 0.02);
  EXPECT_GT(clear, broken);
  EXPECT_GT(broken, blocked);
}

TEST(SenseTest, CameraBoxesInsideImage) {
  SensorModel cam = Lidar(10);
  cam.modality = Modality::kRgb;
  cam.detection_prob = 1.0;
  cam.fov_rad = DegToRad(90);
  cam.mount.position = Vec3(0, 0, 1.5);
  cam.camera = CameraModel{};
  cam.camera->mount_position = cam.mount.position;
  ScenarioConfig scn = OneSensorScenario(cam);
  scn.actors = {StaticActor(1, ObjectClass::kCar, 15, 2), StaticActor(2, ObjectClass::kCar, -15, 0)};
  Rng rng(5);
  const SensorFrame f = Sense(scn, cam, scn.agents[0].PoseAt(Timestamp()), Timestamp(), rng);
  ASSERT_EQ(f.boxes.size(), 1u);
  const Detection2D& d = f.boxes[0];
  EXPECT_GE(d.box.min.x(), 0.0);
  EXPECT_LE(d.box.max.x(), cam.camera->width);
  EXPECT_LT(d.box.min.x(), d.box.max.x());
  EXPECT_LT(d.box.min.y(), d.box.max.y());
  EXPECT_NEAR((d.box.min.x() + d.box.max.x()) / 2, 320.0 - 500.0 * 2 / 15, 25.0);
}

TEST(SensorSimulatorTest, FrozenRepeatsAndDropoutIsSilent) {
  SensorModel lidar = Lidar(10);
  ScenarioConfig scn = OneSensorScenario(lidar);
  scn.actors = Ring(8, 15);
  scn.faults = {{10, FaultType::kFrozen, Timestamp(1'000'000), Timestamp(2'000'000)},
                {10, FaultType::kDropout, Timestamp(3'000'000), Timestamp(4'000'000)}};
  SensorSimulator sim(lidar, 9);
  const AgentSpec& agent = scn.agents[0];
  std::optional<SensorFrame> before;
  for (std::int64_t us = 0; us < 5'000'000; us += 100'000) {
    const Timestamp t(us);
    const auto f = sim.Step(scn, agent.PoseAt(t), t);
    if (us >= 1'000'000 && us < 2'000'000) {
      ASSERT_TRUE(f && before);
      EXPECT_EQ(*f, *before);
    } else if (us >= 3'000'000 && us < 4'000'000) {
      EXPECT_FALSE(f.has_value());
    } else {
      ASSERT_TRUE(f.has_value());
      EXPECT_EQ(f->stamp, t);
    }
    if (us < 1'000'000) before = f;
  }
}

TEST(SensorSimulatorTest, Deterministic) {
  SensorModel lidar = Lidar(10);
  ScenarioConfig scn = OneSensorScenario(lidar);
  scn.actors = Ring(8, 15);
  SensorSimulator a(lidar, 42), b(lidar, 42), c(lidar, 43);
  bool any_diff = false;
  for (std::int64_t us = 0; us < 2'000'000; us += 100'000) {
    const Timestamp t(us);
    const AgentPose pose = scn.agents[0].PoseAt(t);
    const auto fa = a.Step(scn, pose, t);
    EXPECT_EQ(fa, b.Step(scn, pose, t));
    any_diff |= fa != c.Step(scn, pose, t);
  }
  EXPECT_TRUE(any_diff);
}

TEST(SensorModelTest, Firing) {
  SensorModel s = Lidar(1);
  s.frame_rate_hz = 20.0;
  s.phase_micros = 10'000;
  EXPECT_EQ(s.period_micros(), 50'000);
  EXPECT_FALSE(s.FiresAt(Timestamp(0)));
  EXPECT_TRUE(s.FiresAt(Timestamp(10'000)));
  EXPECT_TRUE(s.FiresAt(Timestamp(60'000)));
  EXPECT_FALSE(s.FiresAt(Timestamp(50'000)));
}

TEST(FaultTest, NamesRoundTrip) {
  for (FaultType f : {FaultType::kBlockage, FaultType::kBroken, FaultType::kFrozen, FaultType::kDropout}) {
    EXPECT_EQ(ParseFaultType(ToString(f)), f);
  }
  EXPECT_FALSE(ParseFaultType("smudge").has_value());
  EXPECT_DOUBLE_EQ(FaultDetectionMultiplier(FaultType::kBlockage), 0.43);
  EXPECT_DOUBLE_EQ(FaultDetectionMultiplier(FaultType::kBroken), 0.83);
}

TEST(FaultTest, ActiveIntervalIsHalfOpen) {
  ScenarioConfig scn = OneSensorScenario(Lidar(10));
  scn.faults = {{10, FaultType::kBroken, Timestamp(1'000'000), Timestamp(2'000'000)}};
  EXPECT_FALSE(scn.ActiveFault(10, Timestamp(999'999)).has_value());
  EXPECT_EQ(scn.ActiveFault(10, Timestamp(1'000'000)), FaultType::kBroken);
  EXPECT_FALSE(scn.ActiveFault(10, Timestamp(2'000'000)).has_value());
  EXPECT_FALSE(scn.ActiveFault(11, Timestamp(1'500'000)).has_value());
}

constexpr const char* kMinimal = R"({
  "schema_version": 1,
  "name": "minimal",
  "seed": 3,
  "duration_s": 2,
  "ego_agent": 1,
  "actors": [],
  "agents": [
    {"id": 1, "kind": "vehicle", "start": {"x": 0, "y": 0, "heading_deg": 0},
     "sensors": [{"id": 11, "modality": "lidar", "max_range_m": 50}]}
  ]
})";

std::string ErrorOf(const std::string& text) {
  try {
    ParseScenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

std::string Replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

TEST(ParseScenarioTest, Minimal) {
  const ScenarioConfig scn = ParseScenario(kMinimal);
  EXPECT_EQ(scn.name, "minimal");
  EXPECT_EQ(scn.seed, 3u);
  ASSERT_EQ(scn.agents.size(), 1u);
  EXPECT_EQ(scn.agents[0].sensors[0].max_range_m, 50.0);
  EXPECT_EQ(scn.agents[0].sensors[0].fov_rad, kTwoPi);
}

TEST(ParseScenarioTest, Errors) {
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"name\"", "\"nmae\"")).find("nmae"), std::string::npos);
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"schema_version\": 1", "\"schema_version\": 2")).find("schema_version"),
            std::string::npos);
  const std::string dup = Replace(kMinimal, R"("max_range_m": 50})",
                                  R"("max_range_m": 50}, {"id": 11, "modality": "radar"})");
  EXPECT_NE(ErrorOf(dup).find("duplicate sensor id 11"), std::string::npos);
  const std::string fault = Replace(kMinimal, "\"actors\": []",
                                    R"("actors": [], "faults": [{"sensor_id": 11, "fault": "smudge", "start_s": 0, "end_s": 1}])");
  const std::string msg = ErrorOf(fault);
  EXPECT_NE(msg.find("smudge"), std::string::npos);
  EXPECT_NE(msg.find("blockage, broken, frozen, dropout"), std::string::npos);
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"lidar\"", "\"sonar\"")).find("sonar"), std::string::npos);
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"ego_agent\": 1", "\"ego_agent\": 7")), "");
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"max_range_m\": 50", "\"max_range_m\": -1")), "");
  EXPECT_NE(ErrorOf(Replace(kMinimal, "\"seed\": 3", "\"seed\": \"x\"")).find("/seed"), std::string::npos);
}

TEST(ParseScenarioTest, BadJsonReportsLine) {
  const std::string msg = ErrorOf(Replace(kMinimal, "\"seed\": 3,", "\"seed\": 3,,"));
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(LoadScenarioTest, BundledScenariosLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(COOP_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(LoadScenario(entry.path())) << entry.path();
  }
  EXPECT_THROW(LoadScenario("/nonexistent/x.json"), ScenarioError);
}

TEST(GroundTruthCsvTest, Format) {
  std::ostringstream os;
  WriteGroundTruthHeader(os);
  GroundTruthActor a;
  a.id = 4;
  a.cls = ObjectClass::kPedestrian;
  a.position = Vec3(1, 2, 0.9);
  WriteGroundTruthRows(os, Timestamp(1'500'000), {a});
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,actor_id,x,y,z,heading,vx,vy,class");
  EXPECT_EQ(os.str().substr(os.str().find('\n') + 1, 8), "1.500,4,");
}

}  // namespace
}  // namespace coop
