// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace coop {
namespace {

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

constexpr double kNearPlane = 0.05;

}  // namespace

Mat3 YawRotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

TrackedObject TransformObject(const TrackedObject& obj, const AgentPose& from,
                              const AgentPose& to, Frame target) {
  const Mat3 r_from = YawRotation(from.heading);
  const Mat3 r_to_t = YawRotation(to.heading).transpose();
  const Mat3 r = r_to_t * r_from;

  TrackedObject out = obj;
  out.position = r_to_t * (r_from * obj.position + from.position - to.position);
  out.velocity = r * obj.velocity;
  out.heading = WrapHeading(obj.heading + from.heading - to.heading);

  Mat6 big = Mat6::Zero();
  big.topLeftCorner<3, 3>() = r;
  big.bottomRightCorner<3, 3>() = r;
  out.cov = big * obj.cov * big.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.frame = target;
  return out;
}

TrackedObject ToWorld(const TrackedObject& obj, const AgentPose& pose) {
  AgentPose origin;
  origin.stamp = pose.stamp;
  return TransformObject(obj, pose, origin, Frame::kWorld);
}

TrackedObject ToLocal(const TrackedObject& obj, const AgentPose& pose) {
  AgentPose origin;
  origin.stamp = pose.stamp;
  return TransformObject(obj, origin, pose, Frame::kAgent);
}

AgentPose ComposePose(const AgentPose& agent, const AgentPose& mount) {
  AgentPose out;
  out.agent_id = agent.agent_id;
  out.position = agent.position + YawRotation(agent.heading) * mount.position;
  out.heading = WrapHeading(agent.heading + mount.heading);
  out.stamp = agent.stamp;
  return out;
}

BevBox BevBoxOf(const TrackedObject& obj) {
  return BevBox{obj.position.head<2>(), obj.dims.x(), obj.dims.y(), obj.heading};
}

std::array<Vec2, 4> Corners(const BevBox& box) {
  const double c = std::cos(box.heading);
  const double s = std::sin(box.heading);
  const Vec2 ax(c * box.length / 2, s * box.length / 2);
  const Vec2 ay(-s * box.width / 2, c * box.width / 2);
  return {box.center - ax - ay, box.center + ax - ay, box.center + ax + ay,
          box.center - ax + ay};
}

bool Contains(const BevBox& box, const Vec2& p) {
  const Vec2 d = p - box.center;
  const double c = std::cos(box.heading);
  const double s = std::sin(box.heading);
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  return std::abs(lx) <= box.length / 2 && std::abs(ly) <= box.width / 2;
}

double PolygonArea(std::span<const Vec2> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    twice += Cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * twice;
}

std::vector<Vec2> ClipConvex(std::span<const Vec2> subject,
                             std::span<const Vec2> clip) {
  std::vector<Vec2> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Vec2& c1 = clip[e];
    const Vec2 edge = clip[(e + 1) % clip.size()] - c1;
    const std::vector<Vec2> input = std::move(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double d_cur = Cross(edge, cur - c1);
      const double d_prev = Cross(edge, prev - c1);
      const bool cur_in = d_cur >= 0.0;
      const bool prev_in = d_prev >= 0.0;
      if (cur_in != prev_in) {
        const double t = d_prev / (d_prev - d_cur);
        output.push_back(prev + t * (cur - prev));
      }
      if (cur_in) output.push_back(cur);
    }
  }
  return output;
}

double BevIou(const BevBox& a, const BevBox& b) {
  const double area_a = a.length * a.width;
  const double area_b = b.length * b.width;
  const double reach = 0.5 * (std::hypot(a.length, a.width) + std::hypot(b.length, b.width));
  if ((a.center - b.center).norm() > reach) return 0.0;

  // Canonical clip order keeps the result bitwise symmetric.
  const auto key = [](const BevBox& x) {
    return std::make_tuple(x.center.x(), x.center.y(), x.length, x.width, x.heading);
  };
  const bool swap = key(b) < key(a);
  const auto ca = Corners(swap ? b : a);
  const auto cb = Corners(swap ? a : b);
  const std::vector<Vec2> inter = ClipConvex(ca, cb);
  const double overlap = std::max(0.0, PolygonArea(inter));
  const double uni = area_a + area_b - overlap;
  if (uni <= 0.0) return 0.0;
  return std::clamp(overlap / uni, 0.0, 1.0);
}

double Box2dIou(const Box2D& a, const Box2D& b) {
  const double ix = std::min(a.max.x(), b.max.x()) - std::max(a.min.x(), b.min.x());
  const double iy = std::min(a.max.y(), b.max.y()) - std::max(a.min.y(), b.min.y());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

void CameraModel::Validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw InvariantViolation("camera focal length must be positive");
  if (width <= 0 || height <= 0) throw InvariantViolation("camera image size must be positive");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
    throw InvariantViolation("camera principal point outside image");
  }
}

Vec3 AgentToCamera(const CameraModel& cam, const Vec3& p_agent) {
  const Vec3 m = YawRotation(cam.mount_yaw).transpose() * (p_agent - cam.mount_position);
  const double cp = std::cos(cam.mount_pitch);
  const double sp = std::sin(cam.mount_pitch);
  const double depth = m.x() * cp - m.z() * sp;
  const double up = m.x() * sp + m.z() * cp;
  return Vec3(-m.y(), -up, depth);
}

std::optional<Box2D> ProjectBox(const TrackedObject& obj,
                                const CameraModel& cam,
                                const AgentPose& agent) {
  const TrackedObject local = obj.frame == Frame::kWorld ? ToLocal(obj, agent) : obj;

  const Mat3 rot = YawRotation(local.heading);
  const Vec3 half = local.dims / 2;
  std::array<Vec3, 8> pts;
  for (int i = 0; i < 8; ++i) {
    const Vec3 offset((i & 1) ? half.x() : -half.x(), (i & 2) ? half.y() : -half.y(),
                      (i & 4) ? half.z() : -half.z());
    pts[i] = AgentToCamera(cam, local.position + rot * offset);
  }

  std::vector<Vec3> front;
  front.reserve(20);
  for (const Vec3& p : pts) {
    if (p.z() >= kNearPlane) front.push_back(p);
  }
  // Edges of the box cube differ in exactly one index bit.
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      const int j = i | bit;
      if (j == i) continue;
      const Vec3& a = pts[i];
      const Vec3& b = pts[j];
      if ((a.z() < kNearPlane) != (b.z() < kNearPlane)) {
        const double t = (kNearPlane - a.z()) / (b.z() - a.z());
        front.push_back(a + t * (b - a));
      }
    }
  }
  if (front.empty()) return std::nullopt;

  Vec2 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Vec3& p : front) {
    const Vec2 uv(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
    lo = lo.cwiseMin(uv);
    hi = hi.cwiseMax(uv);
  }
  const Vec2 size(cam.width, cam.height);
  if (hi.x() < 0.0 || hi.y() < 0.0 || lo.x() > size.x() || lo.y() > size.y()) {
    return std::nullopt;
  }
  Box2D box;
  box.min = lo.cwiseMax(Vec2::Zero()).cwiseMin(size);
  box.max = hi.cwiseMax(Vec2::Zero()).cwiseMin(size);
  return box;
}

}  // namespace coop
