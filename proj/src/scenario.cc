// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coop {
namespace {

using nlohmann::json;

constexpr double kOcclusionShrink = 0.9;
constexpr double kMinDim = 0.1;

// Liang-Barsky clip of the segment p0->p1 against |x| <= hx, |y| <= hy.
bool SegmentHitsRect(const Vec2& p0, const Vec2& p1, double hx, double hy) {
  const Vec2 d = p1 - p0;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {p0.x() + hx, hx - p0.x(), p0.y() + hy, hy - p0.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

TrackedObject TruthInFrame(const GroundTruthActor& a, const AgentPose& frame_pose) {
  TrackedObject o;
  o.id = a.id;
  o.class_dist = ClassDistribution::Certain(a.cls);
  o.position = a.position;
  o.velocity = a.velocity;
  o.heading = a.heading;
  o.dims = a.dims;
  o.cov = Mat6::Zero();
  o.existence = 1.0;
  o.frame = Frame::kWorld;
  return ToLocal(o, frame_pose);
}

ObjectClass ConfuseClass(ObjectClass truth, Rng& rng) {
  static constexpr ObjectClass kRoadUsers[] = {ObjectClass::kCar, ObjectClass::kCyclist,
                                               ObjectClass::kPedestrian};
  std::vector<ObjectClass> others;
  for (ObjectClass c : kRoadUsers) {
    if (c != truth) others.push_back(c);
  }
  return others[rng.UniformInt(others.size())];
}

// ---- JSON reading with path context -------------------------------------

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) Fail("expected an object");
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ScenarioError("schema violation at " + (path_.empty() ? "/" : path_) + ": " + what);
  }

  [[noreturn]] void FailKey(const std::string& key, const std::string& what) const {
    throw ScenarioError("schema violation at " + Path(key) + ": " + what);
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  const json& Raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) Fail("missing required key '" + key + "'");
    return j_.at(key);
  }

  double Num(const std::string& key) {
    const json& v = Raw(key);
    if (!v.is_number()) FailKey(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) FailKey(key, "must be finite");
    return d;
  }
  double Num(const std::string& key, double def) { return Has(key) ? Num(key) : Mark(key, def); }

  std::uint64_t UInt(const std::string& key) {
    const json& v = Raw(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      FailKey(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint32_t Id(const std::string& key) {
    const std::uint64_t v = UInt(key);
    if (v > 0xFFFFFFFFull) FailKey(key, "does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
  }

  std::string Str(const std::string& key) {
    const json& v = Raw(key);
    if (!v.is_string()) FailKey(key, "must be a string");
    return v.get<std::string>();
  }
  std::string Str(const std::string& key, const std::string& def) {
    return Has(key) ? Str(key) : Mark(key, def);
  }

  const json& Array(const std::string& key) {
    const json& v = Raw(key);
    if (!v.is_array()) FailKey(key, "must be an array");
    return v;
  }

  Node Child(const std::string& key) { return Node(Raw(key), path_ + "/" + key); }

  std::string Path(const std::string& key) const { return path_ + "/" + key; }

  // Rejects keys that were never read.
  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) Fail("unknown key '" + it.key() + "'");
    }
  }

 private:
  template <typename T>
  T Mark(const std::string& key, T def) {
    used_.insert(key);
    return def;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string Join(std::initializer_list<std::string_view> names) {
  std::string out;
  for (std::string_view n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

Trajectory ReadTrajectory(Node& node) {
  Trajectory tr;
  Node start = node.Child("start");
  tr.start = Vec3(start.Num("x"), start.Num("y"), start.Num("z", 0.0));
  tr.start_heading = WrapHeading(DegToRad(start.Num("heading_deg", 0.0)));
  start.Finish();
  if (node.Has("segments")) {
    const json& segs = node.Array("segments");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      Node s(segs[i], node.Path("segments") + "/" + std::to_string(i));
      Segment seg;
      seg.duration_s = s.Num("duration_s");
      seg.speed_mps = s.Num("speed_mps", 0.0);
      seg.turn_rad = DegToRad(s.Num("turn_deg", 0.0));
      if (!(seg.duration_s > 0.0)) s.Fail("duration_s must be > 0");
      s.Finish();
      tr.segments.push_back(seg);
    }
  }
  return tr;
}

Vec3 ReadVec3(Node& node, const std::string& key) {
  const json& v = node.Array(key);
  if (v.size() != 3) node.Fail("'" + key + "' must have 3 entries");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) node.Fail("'" + key + "' entries must be numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

SensorModel ReadSensor(Node& s) {
  SensorModel m;
  m.sensor_id = s.Id("id");
  const std::string modality = s.Str("modality");
  const auto mod = ParseModality(modality);
  if (!mod) s.Fail("unknown modality '" + modality + "'; valid: " + Join({"lidar", "radar", "rgb", "thermal"}));
  m.modality = *mod;
  if (s.Has("mount")) {
    Node mount = s.Child("mount");
    m.mount.position = Vec3(mount.Num("x", 0.0), mount.Num("y", 0.0), mount.Num("z", 0.0));
    m.mount.heading = WrapHeading(DegToRad(mount.Num("yaw_deg", 0.0)));
    const double pitch = DegToRad(mount.Num("pitch_deg", 0.0));
    mount.Finish();
    if (IsCamera(m.modality)) {
      m.camera = CameraModel{};
      m.camera->mount_pitch = pitch;
    }
  }
  m.fov_rad = DegToRad(s.Num("fov_deg", 360.0));
  m.max_range_m = s.Num("max_range_m", 80.0);
  m.detection_prob = s.Num("detection_prob", 0.9);
  if (s.Has("noise")) {
    Node n = s.Child("noise");
    m.noise.pos_m = n.Num("pos_m", m.noise.pos_m);
    m.noise.vel_mps = n.Num("vel_mps", m.noise.vel_mps);
    m.noise.dim_m = n.Num("dim_m", m.noise.dim_m);
    m.noise.heading_rad = DegToRad(n.Num("heading_deg", RadToDeg(m.noise.heading_rad)));
    m.noise.pixel = n.Num("pixel", m.noise.pixel);
    n.Finish();
  }
  m.class_confusion = s.Num("class_confusion", 0.05);
  m.class_confidence = s.Num("class_confidence", 0.8);
  m.illumination_sensitivity =
      s.Num("illumination_sensitivity", DefaultIlluminationSensitivity(m.modality));
  m.frame_rate_hz = s.Num("frame_rate_hz", 10.0);
  m.confidence = s.Num("confidence", 0.6);
  m.phase_micros = static_cast<std::int64_t>(std::llround(s.Num("phase_ms", 0.0) * 1000.0));
  if (IsCamera(m.modality)) {
    if (!m.camera) m.camera = CameraModel{};
    if (s.Has("camera")) {
      Node c = s.Child("camera");
      m.camera->fx = c.Num("fx", m.camera->fx);
      m.camera->fy = c.Num("fy", m.camera->fy);
      m.camera->cx = c.Num("cx", m.camera->cx);
      m.camera->cy = c.Num("cy", m.camera->cy);
      m.camera->width = static_cast<int>(c.Num("width", m.camera->width));
      m.camera->height = static_cast<int>(c.Num("height", m.camera->height));
      c.Finish();
    }
    m.camera->mount_position = m.mount.position;
    m.camera->mount_yaw = m.mount.heading;
  } else if (s.Has("camera")) {
    s.Fail("'camera' is only valid for rgb/thermal sensors");
  }
  s.Finish();
  return m;
}

std::string LineContext(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

KinematicState Trajectory::At(double t_s) const {
  KinematicState st;
  st.position = start;
  st.heading = start_heading;
  double speed = 0.0;
  double remaining = std::max(0.0, t_s);
  for (const Segment& seg : segments) {
    const double tau = std::min(remaining, seg.duration_s);
    const double omega = seg.turn_rad / seg.duration_s;
    speed = seg.speed_mps;
    if (std::abs(omega) < 1e-12) {
      st.position += Vec3(std::cos(st.heading), std::sin(st.heading), 0.0) * (speed * tau);
    } else {
      const double h1 = st.heading + omega * tau;
      st.position.x() += speed / omega * (std::sin(h1) - std::sin(st.heading));
      st.position.y() -= speed / omega * (std::cos(h1) - std::cos(st.heading));
      st.heading = h1;
    }
    remaining -= tau;
    if (remaining <= 0.0) {
      st.heading = WrapHeading(st.heading);
      st.velocity = Vec3(std::cos(st.heading), std::sin(st.heading), 0.0) * speed;
      return st;
    }
  }
  st.position += Vec3(std::cos(st.heading), std::sin(st.heading), 0.0) * (speed * remaining);
  st.heading = WrapHeading(st.heading);
  st.velocity = Vec3(std::cos(st.heading), std::sin(st.heading), 0.0) * speed;
  return st;
}

std::string_view ToString(FaultType f) {
  switch (f) {
    case FaultType::kBlockage: return "blockage";
    case FaultType::kBroken: return "broken";
    case FaultType::kFrozen: return "frozen";
    case FaultType::kDropout: return "dropout";
  }
  return "?";
}

std::optional<FaultType> ParseFaultType(std::string_view name) {
  for (FaultType f : {FaultType::kBlockage, FaultType::kBroken, FaultType::kFrozen,
                      FaultType::kDropout}) {
    if (ToString(f) == name) return f;
  }
  return std::nullopt;
}

double FaultDetectionMultiplier(FaultType f) {
  // mAP ratios of covered (0.28) and broken (0.54) lenses against clear (0.65).
  switch (f) {
    case FaultType::kBlockage: return 0.43;
    case FaultType::kBroken: return 0.83;
    default: return 1.0;
  }
}

double DefaultIlluminationSensitivity(Modality m) {
  switch (m) {
    case Modality::kRgb: return 0.79;      // 49.85 / 63.02 night vs day AP50
    case Modality::kThermal: return 0.98;  // 49.04 / 50.11
    default: return 1.0;
  }
}

std::int64_t SensorModel::period_micros() const {
  return static_cast<std::int64_t>(std::llround(1e6 / frame_rate_hz));
}

bool SensorModel::FiresAt(Timestamp t) const {
  const std::int64_t period = period_micros();
  return period > 0 && ((t.micros() - phase_micros) % period) == 0 && t.micros() >= phase_micros;
}

AgentPose AgentSpec::PoseAt(Timestamp t) const {
  const KinematicState st = trajectory.At(t.seconds());
  AgentPose pose;
  pose.agent_id = id;
  pose.position = st.position;
  pose.heading = st.heading;
  pose.stamp = t;
  return pose;
}

const AgentSpec& ScenarioConfig::agent(std::uint32_t id) const {
  for (const AgentSpec& a : agents) {
    if (a.id == id) return a;
  }
  throw ScenarioError("unknown agent " + std::to_string(id));
}

std::optional<FaultType> ScenarioConfig::ActiveFault(std::uint32_t sensor_id, Timestamp t) const {
  for (const FaultInterval& f : faults) {
    if (f.sensor_id == sensor_id && t >= f.start && t < f.end) return f.fault;
  }
  return std::nullopt;
}

void ScenarioConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ScenarioError("schema violation: " + what); };
  if (schema_version != kScenarioSchemaVersion) {
    fail("schema_version " + std::to_string(schema_version) + " is not supported (expected " +
         std::to_string(kScenarioSchemaVersion) + ")");
  }
  if (!(duration_s > 0.0)) fail("duration_s must be > 0");
  if (!(eval_radius_m > 0.0)) fail("eval_radius_m must be > 0");
  try {
    channel.Validate();
  } catch (const ConfigError& e) {
    fail(std::string("channel: ") + e.what());
  }

  std::set<std::uint32_t> actor_ids;
  for (const Actor& a : actors) {
    if (!actor_ids.insert(a.id).second) fail("duplicate actor id " + std::to_string(a.id));
    if ((a.dims.array() <= 0.0).any()) fail("actor " + std::to_string(a.id) + " dims must be > 0");
  }
  std::set<std::uint32_t> agent_ids;
  std::set<std::uint32_t> sensor_ids;
  for (const AgentSpec& ag : agents) {
    if (!agent_ids.insert(ag.id).second) fail("duplicate agent id " + std::to_string(ag.id));
    for (const SensorModel& s : ag.sensors) {
      const std::string tag = "sensor " + std::to_string(s.sensor_id);
      if (!sensor_ids.insert(s.sensor_id).second) fail("duplicate sensor id " + std::to_string(s.sensor_id));
      auto prob = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) fail(tag + " " + name + " outside [0,1]");
      };
      prob(s.detection_prob, "detection_prob");
      prob(s.class_confusion, "class_confusion");
      prob(s.class_confidence, "class_confidence");
      prob(s.illumination_sensitivity, "illumination_sensitivity");
      prob(s.confidence, "confidence");
      if (!(s.fov_rad > 0.0 && s.fov_rad <= kTwoPi + 1e-9)) fail(tag + " fov must be in (0, 360] deg");
      if (!(s.max_range_m > 0.0)) fail(tag + " max_range_m must be > 0");
      if (!(s.frame_rate_hz > 0.0)) fail(tag + " frame_rate_hz must be > 0");
      if (s.period_micros() % kTickMicros != 0) {
        fail(tag + " frame period must be a multiple of the 10 ms tick");
      }
      if (s.phase_micros < 0 || s.phase_micros % kTickMicros != 0) {
        fail(tag + " phase_ms must be a non-negative multiple of 10");
      }
      if (s.noise.pos_m < 0 || s.noise.vel_mps < 0 || s.noise.dim_m < 0 ||
          s.noise.heading_rad < 0 || s.noise.pixel < 0) {
        fail(tag + " noise must be >= 0");
      }
      if (IsCamera(s.modality)) {
        if (!s.camera) fail(tag + " camera model missing");
        try {
          s.camera->Validate();
        } catch (const InvariantViolation& e) {
          fail(tag + ": " + e.what());
        }
      }
    }
  }
  if (!agent_ids.contains(ego_agent)) fail("ego_agent " + std::to_string(ego_agent) + " is not an agent");
  for (const FaultInterval& f : faults) {
    if (!sensor_ids.contains(f.sensor_id)) fail("fault refers to unknown sensor " + std::to_string(f.sensor_id));
    if (!(f.start < f.end)) fail("fault interval must have start < end");
  }
}

std::vector<GroundTruthActor> WorldAt(const ScenarioConfig& scn, Timestamp t) {
  if (t.seconds() > scn.duration_s + 1e-9) {
    throw std::out_of_range("time " + std::to_string(t.seconds()) + " s beyond scenario duration");
  }
  std::vector<GroundTruthActor> out;
  out.reserve(scn.actors.size());
  for (const Actor& a : scn.actors) {
    const KinematicState st = a.trajectory.At(t.seconds());
    GroundTruthActor g;
    g.id = a.id;
    g.cls = a.cls;
    g.position = Vec3(st.position.x(), st.position.y(), st.position.z() + a.dims.z() / 2);
    g.heading = st.heading;
    g.velocity = st.velocity;
    g.dims = a.dims;
    out.push_back(g);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  return out;
}

bool RayBlocked(const Vec2& from, const Vec2& to, const BevBox& box) {
  const double c = std::cos(box.heading);
  const double s = std::sin(box.heading);
  auto local = [&](const Vec2& p) {
    const Vec2 d = p - box.center;
    return Vec2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  };
  return SegmentHitsRect(local(from), local(to), kOcclusionShrink * box.length / 2,
                         kOcclusionShrink * box.width / 2);
}

SensorFrame Sense(const ScenarioConfig& scn, const SensorModel& sensor,
                  const AgentPose& agent_pose, Timestamp t, Rng& rng) {
  SensorFrame frame;
  frame.sensor_id = sensor.sensor_id;
  frame.agent_id = agent_pose.agent_id;
  frame.modality = sensor.modality;
  frame.stamp = t;

  const AgentPose sensor_pose = ComposePose(agent_pose, sensor.mount);
  const std::vector<GroundTruthActor> truth = WorldAt(scn, t);
  std::vector<BevBox> footprints;
  footprints.reserve(truth.size());
  for (const GroundTruthActor& g : truth) {
    footprints.push_back(BevBox{g.position.head<2>(), g.dims.x(), g.dims.y(), g.heading});
  }

  double p_detect = sensor.detection_prob;
  if (scn.illumination == Illumination::kNight) p_detect *= sensor.illumination_sensitivity;
  if (auto fault = scn.ActiveFault(sensor.sensor_id, t)) p_detect *= FaultDetectionMultiplier(*fault);

  const SensorNoise& n = sensor.noise;
  const Vec2 origin = sensor_pose.position.head<2>();
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const GroundTruthActor& g = truth[k];
    const TrackedObject in_sensor = TruthInFrame(g, sensor_pose);
    const double range = in_sensor.position.head<2>().norm();
    if (range > sensor.max_range_m) continue;
    if (sensor.fov_rad < kTwoPi &&
        std::abs(std::atan2(in_sensor.position.y(), in_sensor.position.x())) > sensor.fov_rad / 2) {
      continue;
    }
    if (sensor.modality != Modality::kRadar) {
      bool occluded = false;
      for (std::size_t o = 0; o < truth.size() && !occluded; ++o) {
        if (o == k) continue;
        occluded = RayBlocked(origin, g.position.head<2>(), footprints[o]);
      }
      if (occluded) continue;
    }
    if (!rng.Bernoulli(p_detect)) continue;

    const ObjectClass label = rng.Bernoulli(sensor.class_confusion) ? ConfuseClass(g.cls, rng) : g.cls;
    const ClassDistribution dist = ClassDistribution::Peaked(label, sensor.class_confidence);

    switch (sensor.modality) {
      case Modality::kLidar: {
        TrackedObject o = in_sensor;
        for (int i = 0; i < 3; ++i) o.position[i] += rng.Normal(0.0, n.pos_m);
        for (int i = 0; i < 2; ++i) o.velocity[i] += rng.Normal(0.0, n.vel_mps);
        o.heading = WrapHeading(o.heading + rng.Normal(0.0, n.heading_rad));
        for (int i = 0; i < 3; ++i) o.dims[i] = std::max(kMinDim, o.dims[i] + rng.Normal(0.0, n.dim_m));
        o.cov = Mat6::Zero();
        const double sp = std::max(n.pos_m, 0.01);
        const double sv = std::max(n.vel_mps, 0.01);
        o.cov.diagonal() << sp * sp, sp * sp, sp * sp, sv * sv, sv * sv, sv * sv;
        o.class_dist = dist;
        o.existence = sensor.confidence;
        o.stamp = t;
        o.sources = SourceMask(Source::kLidar);
        o.frame = Frame::kSensor;
        frame.objects.push_back(std::move(o));
        break;
      }
      case Modality::kRadar: {
        RadarObject r;
        r.id = g.id;
        r.box.center = in_sensor.position.head<2>() +
                       Vec2(rng.Normal(0.0, n.pos_m), rng.Normal(0.0, n.pos_m));
        r.box.length = std::max(kMinDim, g.dims.x() + rng.Normal(0.0, n.dim_m));
        r.box.width = std::max(kMinDim, g.dims.y() + rng.Normal(0.0, n.dim_m));
        r.box.heading = WrapHeading(in_sensor.heading + rng.Normal(0.0, n.heading_rad));
        r.velocity = in_sensor.velocity.head<2>() +
                     Vec2(rng.Normal(0.0, n.vel_mps), rng.Normal(0.0, n.vel_mps));
        r.class_dist = dist;
        r.sigma_pos = std::max(n.pos_m, 0.01);
        r.sigma_vel = std::max(n.vel_mps, 0.01);
        r.heading_sigma = n.heading_rad;
        frame.radar.push_back(r);
        break;
      }
      case Modality::kRgb:
      case Modality::kThermal: {
        const TrackedObject in_agent = TruthInFrame(g, agent_pose);
        auto box = ProjectBox(in_agent, *sensor.camera, agent_pose);
        if (!box) break;
        const Vec2 size(sensor.camera->width, sensor.camera->height);
        Vec2 a = box->min + Vec2(rng.Normal(0.0, n.pixel), rng.Normal(0.0, n.pixel));
        Vec2 b = box->max + Vec2(rng.Normal(0.0, n.pixel), rng.Normal(0.0, n.pixel));
        Detection2D d;
        d.id = g.id;
        d.box.min = a.cwiseMin(b).cwiseMax(Vec2::Zero()).cwiseMin(size);
        d.box.max = a.cwiseMax(b).cwiseMax(Vec2::Zero()).cwiseMin(size);
        d.score = sensor.class_confidence;
        d.label = label;
        d.source = ToSource(sensor.modality);
        frame.boxes.push_back(d);
        break;
      }
    }
  }
  return frame;
}

SensorSimulator::SensorSimulator(SensorModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(Rng(seed).Substream(model_.sensor_id)) {}

std::optional<SensorFrame> SensorSimulator::Step(const ScenarioConfig& scn,
                                                 const AgentPose& agent_pose, Timestamp t) {
  const auto fault = scn.ActiveFault(model_.sensor_id, t);
  if (fault == FaultType::kDropout) return std::nullopt;
  if (fault == FaultType::kFrozen && last_) return last_;
  last_ = Sense(scn, model_, agent_pose, t, rng_);
  return last_;
}

ScenarioConfig ParseScenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError("parse error at " + LineContext(text, e.byte == 0 ? 0 : e.byte - 1) +
                        ": " + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("parse error: top level must be an object");

  ScenarioConfig scn;
  Node root(doc, "");
  const std::uint64_t version = root.UInt("schema_version");
  if (version != static_cast<std::uint64_t>(kScenarioSchemaVersion)) {
    root.Fail("schema_version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kScenarioSchemaVersion) + ")");
  }
  scn.name = root.Str("name", "unnamed");
  scn.seed = root.Has("seed") ? root.UInt("seed") : 0;
  scn.duration_s = root.Num("duration_s");
  const std::string illum = root.Str("illumination", "day");
  if (illum == "day") {
    scn.illumination = Illumination::kDay;
  } else if (illum == "night") {
    scn.illumination = Illumination::kNight;
  } else {
    root.Fail("unknown illumination '" + illum + "'; valid: day, night");
  }
  scn.ego_agent = root.Id("ego_agent");
  scn.eval_radius_m = root.Num("eval_radius_m", 60.0);

  if (root.Has("channel")) {
    Node ch = root.Child("channel");
    scn.channel.mean_delay_s = ch.Num("mean_delay_ms", 3.0) / 1000.0;
    scn.channel.min_delay_s = ch.Num("min_delay_ms", 1.0) / 1000.0;
    scn.channel.max_delay_s = ch.Num("max_delay_ms", 5.0) / 1000.0;
    scn.channel.loss_prob = ch.Num("loss_prob", 0.0);
    scn.channel.max_range_m = ch.Num("max_range_m", 1000.0);
    ch.Finish();
  }

  const json& actors = root.Has("actors") ? root.Array("actors") : json::array();
  for (std::size_t i = 0; i < actors.size(); ++i) {
    Node a(actors[i], "/actors/" + std::to_string(i));
    Actor actor;
    actor.id = a.Id("id");
    const std::string cls = a.Str("class");
    const auto parsed = ParseObjectClass(cls);
    if (!parsed) a.Fail("unknown class '" + cls + "'; valid: car, cyclist, pedestrian, unknown");
    actor.cls = *parsed;
    actor.dims = ReadVec3(a, "dims");
    actor.trajectory = ReadTrajectory(a);
    a.Finish();
    scn.actors.push_back(std::move(actor));
  }

  const json& agents = root.Array("agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    Node a(agents[i], "/agents/" + std::to_string(i));
    AgentSpec agent;
    agent.id = a.Id("id");
    const std::string kind = a.Str("kind", "vehicle");
    if (kind == "vehicle") {
      agent.kind = AgentKind::kVehicle;
    } else if (kind == "infrastructure") {
      agent.kind = AgentKind::kInfrastructure;
    } else {
      a.Fail("unknown agent kind '" + kind + "'; valid: vehicle, infrastructure");
    }
    agent.trajectory = ReadTrajectory(a);
    const json& sensors = a.Has("sensors") ? a.Array("sensors") : json::array();
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      Node s(sensors[k], "/agents/" + std::to_string(i) + "/sensors/" + std::to_string(k));
      agent.sensors.push_back(ReadSensor(s));
    }
    a.Finish();
    scn.agents.push_back(std::move(agent));
  }

  const json& faults = root.Has("faults") ? root.Array("faults") : json::array();
  for (std::size_t i = 0; i < faults.size(); ++i) {
    Node f(faults[i], "/faults/" + std::to_string(i));
    FaultInterval fi;
    fi.sensor_id = f.Id("sensor_id");
    const std::string name = f.Str("fault");
    const auto type = ParseFaultType(name);
    if (!type) f.Fail("unknown fault '" + name + "'; valid: " + Join({"blockage", "broken", "frozen", "dropout"}));
    fi.fault = *type;
    const double start = f.Num("start_s");
    const double end = f.Num("end_s");
    if (start < 0.0) f.Fail("start_s must be >= 0");
    fi.start = Timestamp::FromSeconds(start);
    fi.end = Timestamp::FromSeconds(std::max(end, 0.0));
    f.Finish();
    scn.faults.push_back(fi);
  }
  root.Finish();
  scn.Validate();
  return scn;
}

ScenarioConfig LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseScenario(buf.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

void WriteGroundTruthHeader(std::ostream& os) { os << "t,actor_id,x,y,z,heading,vx,vy,class\n"; }

void WriteGroundTruthRows(std::ostream& os, Timestamp t, const std::vector<GroundTruthActor>& actors) {
  char line[256];
  for (const GroundTruthActor& g : actors) {
    std::snprintf(line, sizeof(line), "%.3f,%u,%.4f,%.4f,%.4f,%.6f,%.4f,%.4f,%s\n", t.seconds(), g.id,
                  g.position.x(), g.position.y(), g.position.z(), g.heading, g.velocity.x(),
                  g.velocity.y(), std::string(ToString(g.cls)).c_str());
    os << line;
  }
}

}  // namespace coop
