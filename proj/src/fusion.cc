// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "coop/assignment.hpp"

namespace coop {
namespace {

constexpr double kClassFloor = 1e-6;

int ShapePriority(SourceMask sources, const FusionConfig& cfg) {
  int best = -1;
  for (int i = 0; i < kNumSources; ++i) {
    if (sources.has(static_cast<Source>(i))) best = std::max(best, cfg.shape_priority[i]);
  }
  return best;
}

double PositionTrace(const Mat6& cov) { return cov.topLeftCorner<3, 3>().trace(); }

// Agent-frame position of a world-frame track.
Vec3 ToAgentPoint(const Vec3& p_world, const AgentPose& agent) {
  return YawRotation(agent.heading).transpose() * (p_world - agent.position);
}

bool SameCamera(const CameraModel& a, const CameraModel& b) {
  return a.fx == b.fx && a.fy == b.fy && a.cx == b.cx && a.cy == b.cy && a.width == b.width &&
         a.height == b.height && a.mount_position == b.mount_position &&
         a.mount_yaw == b.mount_yaw && a.mount_pitch == b.mount_pitch;
}

struct TrackRef {
  std::uint32_t id;
  TrackEntry* entry;
};

std::vector<TrackRef> Snapshot(TrackTable& table) {
  std::vector<TrackRef> refs;
  refs.reserve(table.size());
  for (auto& [id, entry] : table.tracks()) refs.push_back({id, &entry});
  return refs;
}

std::vector<TrackedObject> Objects(const std::vector<TrackRef>& refs) {
  std::vector<TrackedObject> out;
  out.reserve(refs.size());
  for (const TrackRef& r : refs) out.push_back(r.entry->obj);
  return out;
}

void Decay(TrackEntry& entry, double dt_s, const FusionConfig& cfg) {
  entry.obj = UpdateExistence(entry.obj, std::nullopt, dt_s, cfg);
  ++entry.misses;
}

void FuseThreeDimensional(TrackTable& table, const SensorFrame& frame, const SensorInfo& info,
                          const AgentPose& agent_pose, const FusionConfig& cfg) {
  const AgentPose sensor_pose = ComposePose(agent_pose, info.mount);
  const double inflate = 1.0 / std::max(info.trust, cfg.trust_floor);
  const Source source = ToSource(frame.modality);

  std::vector<TrackedObject> obs;
  obs.reserve(frame.detection_count());
  auto add = [&](TrackedObject o) {
    o.frame = Frame::kSensor;
    o.stamp = frame.stamp;
    TrackedObject w = ToWorld(o, sensor_pose);
    w.cov *= inflate;
    w.sources = SourceMask(source);
    w.existence = 0.0;
    obs.push_back(std::move(w));
  };
  for (const TrackedObject& o : frame.objects) add(o);
  for (const RadarObject& r : frame.radar) add(RadarLift(r, frame.stamp, cfg));

  const std::vector<TrackRef> refs = Snapshot(table);
  const std::vector<TrackedObject> tracks = Objects(refs);
  const AssociationResult assoc = Associate(tracks, obs, cfg);

  for (const auto& [ti, oi] : assoc.matches) {
    TrackEntry& e = *refs[ti].entry;
    e.obj = UpdateExistence(FusePair(e.obj, obs[oi], cfg), info.confidence, 0.0, cfg);
    e.last_update = frame.stamp;
    e.misses = 0;
    e.remote_sender.reset();
  }
  for (int ti : assoc.unmatched_a) {
    TrackEntry& e = *refs[ti].entry;
    if (info.Covers(ToAgentPoint(e.obj.position, agent_pose))) {
      Decay(e, info.frame_period_s, cfg);
    }
  }
  if (info.trust > 0.0) {
    for (int oi : assoc.unmatched_b) {
      TrackedObject birth = obs[oi];
      birth.existence = 0.5 * info.confidence;
      table.Insert(std::move(birth), frame.stamp);
    }
  }
}

struct CameraBatch {
  Timestamp stamp;
  CameraModel camera;
  std::vector<const SensorFrame*> frames;
};

void FuseCameraBatch(TrackTable& table, const CameraBatch& batch, const SensorRig& rig,
                     const AgentPose& agent_pose, const FusionConfig& cfg) {
  // Boxes from co-located cameras share the core image plane; merge them first.
  std::vector<Detection2D> pooled;
  std::vector<const SensorInfo*> owner;
  for (const SensorFrame* f : batch.frames) {
    const SensorInfo& info = rig.at(f->sensor_id);
    if (info.trust <= 0.0) continue;
    for (Detection2D d : f->boxes) {
      d.id = static_cast<std::uint32_t>(pooled.size());
      d.source = ToSource(f->modality);
      pooled.push_back(d);
      owner.push_back(&info);
    }
  }
  const std::vector<Detection2D> kept = NmsMerge2d(pooled, cfg.nms_iou);

  const std::vector<TrackRef> refs = Snapshot(table);
  std::vector<std::optional<Box2D>> projected(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    projected[i] = ProjectBox(refs[i].entry->obj, batch.camera, agent_pose);
  }

  Eigen::MatrixXd cost(refs.size(), kept.size());
  cost.setConstant(std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!projected[i]) continue;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const double iou = Box2dIou(*projected[i], kept[j].box);
      if (iou >= cfg.iou_gate && iou > 0.0) cost(i, j) = -iou;
    }
  }
  const auto pairs = SolveGatedAssignment(cost);

  std::vector<char> matched(refs.size(), 0);
  for (const auto& [ti, bj] : pairs) {
    const Detection2D& det = kept[bj];
    const SensorInfo& info = *owner[det.id];
    TrackEntry& e = *refs[ti].entry;
    const double score = std::clamp(det.score, 0.0, 1.0);
    e.obj.class_dist = FuseClasses(e.obj.class_dist, 1.0, ClassDistribution::Peaked(det.label, score),
                                   cfg.class_weight[static_cast<int>(det.source)]);
    e.obj.sources |= SourceMask(det.source);
    e.obj = UpdateExistence(e.obj, info.confidence, 0.0, cfg);
    e.last_update = batch.stamp;
    e.misses = 0;
    e.remote_sender.reset();
    matched[ti] = 1;
  }
  const SensorInfo& lead = rig.at(batch.frames.front()->sensor_id);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (matched[i] || !projected[i]) continue;
    TrackEntry& e = *refs[i].entry;
    if (lead.Covers(ToAgentPoint(e.obj.position, agent_pose))) {
      Decay(e, lead.frame_period_s, cfg);
    }
  }
}

}  // namespace

void FusionConfig::Validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(dist_gate_m > 0.0)) throw InvariantViolation("dist_gate_m must be > 0");
  if (!in01(iou_gate)) throw InvariantViolation("iou_gate outside [0,1]");
  for (double w : class_weight) {
    if (!(w > 0.0)) throw InvariantViolation("class weights must be > 0");
  }
  if (!(velocity_weight > 0.0)) throw InvariantViolation("velocity_weight must be > 0");
  if (!in01(existence_publish_threshold) || !in01(track_drop_threshold) ||
      track_drop_threshold > existence_publish_threshold) {
    throw InvariantViolation("existence thresholds invalid");
  }
  if (!(existence_decay_per_second >= 0.0)) throw InvariantViolation("decay must be >= 0");
  if (!(radar_default_height_m > 0.0) || !(radar_z_variance > 0.0)) {
    throw InvariantViolation("radar height defaults must be > 0");
  }
  if (!in01(nms_iou)) throw InvariantViolation("nms_iou outside [0,1]");
  if (!(q_accel >= 0.0) || !(max_staleness_s > 0.0) || !(max_coast_s > 0.0)) {
    throw InvariantViolation("timing parameters invalid");
  }
  if (!(trust_floor > 0.0 && trust_floor <= 1.0)) throw InvariantViolation("trust_floor invalid");
}

TrackedObject PredictTo(const TrackedObject& obj, Timestamp t, double q_accel,
                        double max_staleness_s) {
  const double dt = (t - obj.stamp).seconds();
  if (std::abs(dt) > max_staleness_s) {
    throw StaleTrack("prediction span " + std::to_string(dt) + " s exceeds staleness gate");
  }
  TrackedObject out = obj;
  out.stamp = t;
  if (dt == 0.0) return out;

  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = dt * Mat3::Identity();
  // Per axis, noise enters through G = [dt^2/2, dt]^T.
  const double g_pos = 0.5 * dt * dt;
  const double g_vel = dt;
  const double q2 = q_accel * q_accel;
  Mat6 q = Mat6::Zero();
  q.topLeftCorner<3, 3>() = q2 * g_pos * g_pos * Mat3::Identity();
  q.topRightCorner<3, 3>() = q2 * g_pos * g_vel * Mat3::Identity();
  q.bottomLeftCorner<3, 3>() = q2 * g_pos * g_vel * Mat3::Identity();
  q.bottomRightCorner<3, 3>() = q2 * g_vel * g_vel * Mat3::Identity();

  out.position = obj.position + dt * obj.velocity;
  out.cov = f * obj.cov * f.transpose() + q;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

AssociationResult Associate(std::span<const TrackedObject> a,
                            std::span<const TrackedObject> b,
                            const FusionConfig& cfg) {
  AssociationResult result;
  Eigen::MatrixXd cost(a.size(), b.size());
  cost.setConstant(std::numeric_limits<double>::infinity());
  std::vector<BevBox> boxes_b;
  boxes_b.reserve(b.size());
  for (const TrackedObject& o : b) boxes_b.push_back(BevBoxOf(o));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const BevBox box_a = BevBoxOf(a[i]);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double dist = (a[i].position.head<2>() - b[j].position.head<2>()).norm();
      const double iou = BevIou(box_a, boxes_b[j]);
      if (dist <= cfg.dist_gate_m || iou >= cfg.iou_gate) {
        cost(i, j) = dist - cfg.dist_gate_m * iou;
      }
    }
  }
  result.matches = SolveGatedAssignment(cost);
  std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
  for (const auto& [i, j] : result.matches) {
    used_a[i] = 1;
    used_b[j] = 1;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!used_a[i]) result.unmatched_a.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!used_b[j]) result.unmatched_b.push_back(static_cast<int>(j));
  }
  return result;
}

double ClassWeight(SourceMask sources, const FusionConfig& cfg) {
  double w = 0.0;
  for (int i = 0; i < kNumSources; ++i) {
    if (sources.has(static_cast<Source>(i))) w = std::max(w, cfg.class_weight[i]);
  }
  return w > 0.0 ? w : 1.0;
}

ClassDistribution FuseClasses(const ClassDistribution& global, double global_weight,
                              const ClassDistribution& obs, double obs_weight) {
  std::array<double, kNumClasses> raw{};
  for (int i = 0; i < kNumClasses; ++i) {
    const double pg = std::max(global.probs()[i], kClassFloor);
    const double po = std::max(obs.probs()[i], kClassFloor);
    raw[i] = std::pow(pg, global_weight) * std::pow(po, obs_weight);
  }
  return NormalizeClassDist(raw);
}

TrackedObject FusePair(const TrackedObject& global, const TrackedObject& obs,
                       const FusionConfig& cfg) {
  if (!IsSymmetricPsd(global.cov) || !IsSymmetricPsd(obs.cov)) {
    throw InvariantViolation("fuse_pair: covariance is not symmetric PSD");
  }
  Mat6 r = obs.cov;
  if (obs.sources.has(Source::kRadar)) {
    Vec6 scale = Vec6::Ones();
    scale.tail<3>().setConstant(1.0 / std::sqrt(cfg.velocity_weight));
    r = scale.asDiagonal() * r * scale.asDiagonal();
  }

  Vec6 x;
  x << global.position, global.velocity;
  Vec6 z;
  z << obs.position, obs.velocity;
  const Mat6& p = global.cov;
  const Mat6 s = p + r;

  // K = P S^-1, computed as (S^-1 P)^T since both are symmetric.
  Mat6 k;
  Eigen::LDLT<Mat6> ldlt(s);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
    k = ldlt.solve(p).transpose();
  } else {
    k = p * s.completeOrthogonalDecomposition().pseudoInverse();
  }
  const Vec6 x_new = x + k * (z - x);
  const Mat6 i_k = Mat6::Identity() - k;
  Mat6 p_new = i_k * p * i_k.transpose() + k * r * k.transpose();
  p_new = 0.5 * (p_new + p_new.transpose());

  TrackedObject out = global;
  out.position = x_new.head<3>();
  out.velocity = x_new.tail<3>();
  out.cov = p_new;

  const double wg = 1.0 / std::max(PositionTrace(global.cov), 1e-12);
  const double wo = 1.0 / std::max(PositionTrace(obs.cov), 1e-12);
  out.heading = WrapHeading(std::atan2(wg * std::sin(global.heading) + wo * std::sin(obs.heading),
                                       wg * std::cos(global.heading) + wo * std::cos(obs.heading)));

  out.class_dist = FuseClasses(global.class_dist, 1.0, obs.class_dist, ClassWeight(obs.sources, cfg));

  const int prio_g = ShapePriority(global.sources, cfg);
  const int prio_o = ShapePriority(obs.sources, cfg);
  if (prio_o > prio_g) {
    out.dims = obs.dims;
  } else if (prio_o == prio_g) {
    out.dims = 0.5 * (global.dims + obs.dims);
  }
  out.sources = global.sources | obs.sources;
  return out;
}

TrackedObject UpdateExistence(const TrackedObject& track,
                              std::optional<double> observed_confidence,
                              double dt_s, const FusionConfig& cfg) {
  TrackedObject out = track;
  double p = std::clamp(track.existence, 0.0, 1.0);
  if (observed_confidence) {
    const double c = std::clamp(*observed_confidence, 0.0, 1.0);
    p = 1.0 - (1.0 - p) * (1.0 - c);
  } else {
    p *= std::exp(-cfg.existence_decay_per_second * std::max(0.0, dt_s));
  }
  out.existence = std::clamp(p, 0.0, 1.0);
  return out;
}

std::uint32_t TrackTable::Insert(TrackedObject obj, Timestamp now,
                                 std::optional<std::uint32_t> remote_sender) {
  const std::uint32_t id = next_id_++;
  obj.id = id;
  TrackEntry entry;
  entry.obj = std::move(obj);
  entry.last_update = now;
  entry.remote_sender = remote_sender;
  tracks_.emplace(id, std::move(entry));
  return id;
}

void TrackTable::PredictAll(Timestamp t, const FusionConfig& cfg) {
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    TrackedObject& obj = it->second.obj;
    if (obj.stamp == t) {
      ++it;
      continue;
    }
    try {
      obj = PredictTo(obj, t, cfg.q_accel, cfg.max_staleness_s);
      ++it;
    } catch (const StaleTrack&) {
      it = tracks_.erase(it);
    }
  }
}

void TrackTable::DropCoasted(Timestamp t, const FusionConfig& cfg) {
  std::erase_if(tracks_, [&](const auto& kv) {
    return (t - kv.second.last_update).seconds() > cfg.max_coast_s;
  });
}

std::vector<TrackedObject> Publish(TrackTable& table, const FusionConfig& cfg) {
  std::erase_if(table.tracks(), [&](const auto& kv) {
    return kv.second.obj.existence < cfg.track_drop_threshold;
  });
  std::vector<TrackedObject> out;
  for (const auto& [id, entry] : table.tracks()) {
    if (entry.obj.existence >= cfg.existence_publish_threshold) out.push_back(entry.obj);
  }
  return out;
}

TrackedObject RadarLift(const RadarObject& bev, Timestamp stamp, const FusionConfig& cfg) {
  TrackedObject out;
  out.id = bev.id;
  out.class_dist = bev.class_dist;
  const double h = cfg.radar_default_height_m;
  out.position = Vec3(bev.box.center.x(), bev.box.center.y(), h / 2);
  out.velocity = Vec3(bev.velocity.x(), bev.velocity.y(), 0.0);
  out.heading = WrapHeading(bev.box.heading);
  out.dims = Vec3(bev.box.length, bev.box.width, h);
  const double sp = bev.sigma_pos * bev.sigma_pos;
  const double sv = bev.sigma_vel * bev.sigma_vel;
  out.cov = Mat6::Zero();
  out.cov.diagonal() << sp, sp, cfg.radar_z_variance, sv, sv, sv;
  out.stamp = stamp;
  out.sources = SourceMask(Source::kRadar);
  out.frame = Frame::kSensor;
  return out;
}

std::vector<Detection2D> NmsMerge2d(std::span<const Detection2D> boxes, double nms_iou) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].score != boxes[b].score) return boxes[a].score > boxes[b].score;
    return boxes[a].id < boxes[b].id;
  });
  std::vector<Detection2D> kept;
  for (std::size_t idx : order) {
    const Detection2D& cand = boxes[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection2D& k) {
      return k.label == cand.label && Box2dIou(k.box, cand.box) >= nms_iou;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

bool SensorInfo::Covers(const Vec3& p_agent) const {
  const Vec3 local = YawRotation(mount.heading).transpose() * (p_agent - mount.position);
  if (local.head<2>().norm() > max_range_m) return false;
  if (fov_rad >= kTwoPi) return true;
  return std::abs(std::atan2(local.y(), local.x())) <= fov_rad / 2;
}

std::vector<TrackedObject> IntraFuseStep(TrackTable& table,
                                         std::span<const SensorFrame> frames,
                                         const AgentPose& agent_pose,
                                         const SensorRig& rig,
                                         const FusionConfig& cfg, Timestamp t) {
  for (const SensorFrame& f : frames) {
    if (f.agent_id != agent_pose.agent_id) {
      throw InvariantViolation("intra fusion received a frame from agent " +
                               std::to_string(f.agent_id) + ", expected " +
                               std::to_string(agent_pose.agent_id));
    }
    if (!rig.contains(f.sensor_id)) {
      throw InvariantViolation("frame from unknown sensor " + std::to_string(f.sensor_id));
    }
  }

  std::vector<const SensorFrame*> order;
  order.reserve(frames.size());
  for (const SensorFrame& f : frames) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(), [](const SensorFrame* a, const SensorFrame* b) {
    if (a->stamp != b->stamp) return a->stamp < b->stamp;
    return a->sensor_id < b->sensor_id;
  });

  // Skip frames already consumed (a frozen driver re-publishes its last frame).
  std::vector<const SensorFrame*> fresh;
  for (const SensorFrame* f : order) {
    auto [it, inserted] = table.last_frame().try_emplace(f->sensor_id, f->stamp);
    if (!inserted) {
      if (f->stamp <= it->second) continue;
      it->second = f->stamp;
    }
    fresh.push_back(f);
  }

  for (std::size_t i = 0; i < fresh.size();) {
    const SensorFrame& f = *fresh[i];
    const SensorInfo& info = rig.at(f.sensor_id);
    table.PredictAll(f.stamp, cfg);
    if (!IsCamera(f.modality)) {
      FuseThreeDimensional(table, f, info, agent_pose, cfg);
      ++i;
      continue;
    }
    if (!info.camera) {
      throw InvariantViolation("camera sensor " + std::to_string(f.sensor_id) + " has no model");
    }
    CameraBatch batch{f.stamp, *info.camera, {&f}};
    std::size_t j = i + 1;
    for (; j < fresh.size(); ++j) {
      const SensorFrame& g = *fresh[j];
      if (g.stamp != f.stamp || !IsCamera(g.modality)) break;
      const SensorInfo& gi = rig.at(g.sensor_id);
      if (!gi.camera || !SameCamera(*gi.camera, batch.camera)) break;
      batch.frames.push_back(&g);
    }
    FuseCameraBatch(table, batch, rig, agent_pose, cfg);
    i = j;
  }

  table.PredictAll(t, cfg);
  table.DropCoasted(t, cfg);
  return Publish(table, cfg);
}

std::vector<TrackedObject> InterFuseStep(TrackTable& table, const cpm::CpmMessage& remote,
                                         const AgentPose& ego_pose,
                                         const FusionConfig& cfg, Timestamp t) {
  const double age = (t - remote.sender.stamp).seconds();
  if (age > cfg.max_staleness_s || age < -cfg.max_staleness_s) {
    table.CountStaleMessage();
    return Publish(table, cfg);
  }
  table.PredictAll(t, cfg);

  std::vector<TrackedObject> obs;
  obs.reserve(remote.objects.size());
  for (const TrackedObject& o : remote.objects) {
    TrackedObject in_ego = TransformObject(o, remote.sender, ego_pose, Frame::kAgent);
    TrackedObject w = ToWorld(in_ego, ego_pose);
    w = PredictTo(w, t, cfg.q_accel, cfg.max_staleness_s);
    w.sources |= SourceMask(Source::kRemote);
    obs.push_back(std::move(w));
  }

  const std::vector<TrackRef> refs = Snapshot(table);
  const std::vector<TrackedObject> tracks = Objects(refs);
  const AssociationResult assoc = Associate(tracks, obs, cfg);
  for (const auto& [ti, oi] : assoc.matches) {
    TrackEntry& e = *refs[ti].entry;
    const double remote_existence = obs[oi].existence;
    TrackedObject fused = FusePair(e.obj, obs[oi], cfg);
    fused.existence = e.obj.existence;
    e.obj = UpdateExistence(fused, remote_existence, 0.0, cfg);
    e.last_update = t;
    e.misses = 0;
  }
  for (int ti : assoc.unmatched_a) {
    TrackEntry& e = *refs[ti].entry;
    if (e.remote_sender == remote.sender.agent_id) Decay(e, cfg.remote_period_s, cfg);
  }
  for (int oi : assoc.unmatched_b) {
    TrackedObject birth = obs[oi];
    birth.existence = 0.5 * birth.existence;
    table.Insert(std::move(birth), t, remote.sender.agent_id);
  }

  table.DropCoasted(t, cfg);
  return Publish(table, cfg);
}

}  // namespace coop
