// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "coop/core.hpp"

namespace coop {

// Planar rotation about +z (yaw), embedded in 3D.
Mat3 YawRotation(double yaw);

// Re-expresses `obj` from the frame of `from` into the frame of `to`. Both
// poses are given in a common parent frame. Position, velocity, heading and
// covariance change; dims, class and existence do not. The result is tagged
// `target` (kAgent by default).
TrackedObject TransformObject(const TrackedObject& obj, const AgentPose& from,
                              const AgentPose& to,
                              Frame target = Frame::kAgent);

// Local frame of `pose` -> parent frame, tagged kWorld.
TrackedObject ToWorld(const TrackedObject& obj, const AgentPose& pose);
// Parent frame -> local frame of `pose`, tagged kAgent.
TrackedObject ToLocal(const TrackedObject& obj, const AgentPose& pose);

// Composes a sensor mount (expressed in the agent frame) with the agent pose.
AgentPose ComposePose(const AgentPose& agent, const AgentPose& mount);

struct BevBox {
  Vec2 center = Vec2::Zero();
  double length = 1.0;
  double width = 1.0;
  double heading = 0.0;
};

BevBox BevBoxOf(const TrackedObject& obj);

// Counter-clockwise corners.
std::array<Vec2, 4> Corners(const BevBox& box);
bool Contains(const BevBox& box, const Vec2& p);

// Shoelace area; positive for counter-clockwise polygons.
double PolygonArea(std::span<const Vec2> poly);

// Sutherland-Hodgman clip of `subject` against the convex CCW polygon `clip`.
std::vector<Vec2> ClipConvex(std::span<const Vec2> subject,
                             std::span<const Vec2> clip);

// Rotated-rectangle intersection over union, symmetric, in [0, 1].
double BevIou(const BevBox& a, const BevBox& b);

struct Box2D {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  double area() const {
    return std::max(0.0, max.x() - min.x()) * std::max(0.0, max.y() - min.y());
  }
  bool operator==(const Box2D& o) const {
    return min == o.min && max == o.max;
  }
};

double Box2dIou(const Box2D& a, const Box2D& b);

// Pinhole camera mounted on an agent. The optical axis looks along the mount
// yaw (tilted by pitch, positive down); image u grows to the right and v
// grows downward.
struct CameraModel {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Vec3 mount_position = Vec3::Zero();
  double mount_yaw = 0.0;
  double mount_pitch = 0.0;

  // Throws InvariantViolation on bad intrinsics.
  void Validate() const;
};

// Point in the agent frame -> camera optical frame (x right, y down, z ahead).
Vec3 AgentToCamera(const CameraModel& cam, const Vec3& p_agent);

// Projects the 3D box of `obj` and returns its axis-aligned image hull clamped
// to the image, or nullopt when nothing of it lands in front of the camera
// inside the image. World-tagged objects are first moved into `agent`'s frame.
std::optional<Box2D> ProjectBox(const TrackedObject& obj,
                                const CameraModel& cam,
                                const AgentPose& agent);

}  // namespace coop
