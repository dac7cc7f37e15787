// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "coop/geometry.hpp"
#include "test_util.hpp"

namespace coop {
namespace {

TrackedObject MakeObject(const Vec3& p, double heading = 0.0) {
  TrackedObject o;
  o.position = p;
  o.velocity = Vec3(1.0, 0.5, 0.0);
  o.heading = heading;
  o.dims = Vec3(4.0, 2.0, 1.5);
  o.existence = 0.7;
  return o;
}

AgentPose Pose(double x, double y, double heading) {
  AgentPose p;
  p.position = Vec3(x, y, 0.0);
  p.heading = heading;
  return p;
}

TEST(TransformTest, IdentityPoses) {
  const TrackedObject o = MakeObject(Vec3(3, 4, 1), 0.3);
  const TrackedObject t = TransformObject(o, AgentPose{}, AgentPose{});
  EXPECT_TRUE(t.position.isApprox(o.position));
  EXPECT_DOUBLE_EQ(t.heading, o.heading);
  EXPECT_EQ(t.dims, o.dims);
}

TEST(TransformTest, PureTranslation) {
  const TrackedObject o = MakeObject(Vec3(12, 0, 0));
  const TrackedObject t = TransformObject(o, AgentPose{}, Pose(10, 0, 0));
  EXPECT_NEAR((t.position - Vec3(2, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(t.frame, Frame::kAgent);
}

TEST(TransformTest, QuarterTurn) {
  TrackedObject o = MakeObject(Vec3(1, 0, 0), 0.2);
  o.cov = Mat6::Zero();
  o.cov(0, 0) = 4.0;
  o.cov(1, 1) = 1.0;
  const TrackedObject t = TransformObject(o, AgentPose{}, Pose(0, 0, kPi / 2));
  // Reference 2x2 rotation by -pi/2.
  const double c = std::cos(-kPi / 2);
  const double s = std::sin(-kPi / 2);
  EXPECT_NEAR(t.position.x(), c * 1 - s * 0, 1e-12);
  EXPECT_NEAR(t.position.y(), s * 1 + c * 0, 1e-12);
  EXPECT_NEAR(t.position.y(), -1.0, 1e-12);
  EXPECT_NEAR(t.heading, 0.2 - kPi / 2, 1e-12);
  EXPECT_NEAR(t.cov(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(t.cov(1, 1), 4.0, 1e-12);
  EXPECT_EQ(t.class_dist, o.class_dist);
  EXPECT_EQ(t.existence, o.existence);
}

TEST(TransformTest, RoundTripAndPsd) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    TrackedObject o = MakeObject(Vec3(rng.Uniform(-100, 100), rng.Uniform(-100, 100), 1.0),
                                 rng.Uniform(-kPi, kPi));
    o.cov = testing::RandomSpd(rng, 1e-6, 5.0);
    const AgentPose a = testing::RandomPose(rng);
    const AgentPose b = testing::RandomPose(rng);
    const TrackedObject there = TransformObject(o, a, b);
    ASSERT_TRUE(IsSymmetricPsd(there.cov));
    const TrackedObject back = TransformObject(there, b, a);
    ASSERT_LT((back.position - o.position).norm(), 1e-9);
    ASSERT_LT((back.velocity - o.velocity).norm(), 1e-9);
    ASSERT_LT(std::abs(std::remainder(back.heading - o.heading, kTwoPi)), 1e-9);
    ASSERT_LT((back.cov - o.cov).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TransformTest, ToWorldInvertsToLocal) {
  const AgentPose pose = Pose(5, -3, 1.0);
  const TrackedObject o = MakeObject(Vec3(2, 1, 0.5), -0.4);
  const TrackedObject w = ToWorld(o, pose);
  EXPECT_EQ(w.frame, Frame::kWorld);
  const TrackedObject l = ToLocal(w, pose);
  EXPECT_LT((l.position - o.position).norm(), 1e-12);
}

TEST(BevIouTest, Examples) {
  const BevBox a{Vec2(0, 0), 1, 1, 0};
  EXPECT_DOUBLE_EQ(BevIou(a, a), 1.0);
  EXPECT_EQ(BevIou(a, BevBox{Vec2(100, 0), 1, 1, 0}), 0.0);
  EXPECT_NEAR(BevIou(a, BevBox{Vec2(0.5, 0), 1, 1, 0}), 1.0 / 3.0, 1e-12);
  Rng rng(1);
  EXPECT_NEAR(testing::MonteCarloIou(a, BevBox{Vec2(0.5, 0), 1, 1, 0}, 1000, rng), 1.0 / 3.0, 1e-3);
}

TEST(BevIouTest, HeadingModPi) {
  const BevBox a{Vec2(1, 2), 4, 2, 0.3};
  BevBox b = a;
  b.heading = WrapHeading(0.3 + kPi);
  EXPECT_NEAR(BevIou(a, b), 1.0, 1e-12);
  BevBox swapped = a;
  std::swap(swapped.length, swapped.width);
  EXPECT_LT(BevIou(a, swapped), 1.0);
}

TEST(BevIouTest, MatchesMonteCarloOracle) {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const BevBox a = testing::RandomBox(rng, 2.0);
    const BevBox b = testing::RandomBox(rng, 2.0);
    const double iou = BevIou(a, b);
    ASSERT_GE(iou, 0.0);
    ASSERT_LE(iou, 1.0);
    ASSERT_DOUBLE_EQ(iou, BevIou(b, a));
    ASSERT_NEAR(iou, testing::MonteCarloIou(a, b, 500, rng), 3e-3) << i;
  }
}

TEST(BevIouTest, ContainedBox) {
  const BevBox big{Vec2(0, 0), 4, 4, 0.7};
  const BevBox small{Vec2(0.2, -0.1), 1, 1, -0.3};
  EXPECT_NEAR(BevIou(big, small), 1.0 / 16.0, 1e-12);
}

TEST(Box2dIouTest, Examples) {
  const Box2D a{Vec2(0, 0), Vec2(2, 2)};
  EXPECT_DOUBLE_EQ(Box2dIou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(Box2dIou(a, Box2D{Vec2(2, 0), Vec2(4, 2)}), 0.0);
  EXPECT_DOUBLE_EQ(Box2dIou(a, Box2D{Vec2(1, 1), Vec2(3, 3)}), 1.0 / 7.0);
}

TEST(PolygonTest, ShoelaceAndClip) {
  const std::vector<Vec2> square = {Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)};
  EXPECT_DOUBLE_EQ(PolygonArea(square), 4.0);
  const std::vector<Vec2> shifted = {Vec2(1, 1), Vec2(3, 1), Vec2(3, 3), Vec2(1, 3)};
  EXPECT_DOUBLE_EQ(PolygonArea(ClipConvex(square, shifted)), 1.0);
}

// Reference pinhole projection of one agent-frame point for a camera at the
// agent origin looking along +x: u = fx * (-y) / x + cx, v = fy * (-z) / x + cy.
Vec2 PinholeReference(const CameraModel& cam, const Vec3& p) {
  return Vec2(cam.fx * -p.y() / p.x() + cam.cx, cam.fy * -p.z() / p.x() + cam.cy);
}

TEST(ProjectBoxTest, UnitCubeTenMetersAhead) {
  const CameraModel cam;
  TrackedObject o;
  o.position = Vec3(10, 0, 0);
  o.dims = Vec3(1, 1, 1);
  o.frame = Frame::kAgent;
  const auto box = ProjectBox(o, cam, AgentPose{});
  ASSERT_TRUE(box.has_value());
  double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
  for (double dx : {-0.5, 0.5}) {
    for (double dy : {-0.5, 0.5}) {
      for (double dz : {-0.5, 0.5}) {
        const Vec2 uv = PinholeReference(cam, Vec3(10 + dx, dy, dz));
        umin = std::min(umin, uv.x());
        umax = std::max(umax, uv.x());
        vmin = std::min(vmin, uv.y());
        vmax = std::max(vmax, uv.y());
      }
    }
  }
  EXPECT_NEAR(box->min.x(), umin, 1e-9);
  EXPECT_NEAR(box->max.x(), umax, 1e-9);
  EXPECT_NEAR(box->min.y(), vmin, 1e-9);
  EXPECT_NEAR(box->max.y(), vmax, 1e-9);
  EXPECT_NEAR(box->min.x(), 295, 2.0);
  EXPECT_NEAR(box->max.x(), 345, 2.0);
}

TEST(ProjectBoxTest, PointObjectCollapsesToPrincipalPoint) {
  const CameraModel cam;
  TrackedObject o;
  o.position = Vec3(8, 0, 0);
  o.dims = Vec3(1e-6, 1e-6, 1e-6);
  o.frame = Frame::kAgent;
  const auto box = ProjectBox(o, cam, AgentPose{});
  ASSERT_TRUE(box.has_value());
  EXPECT_NEAR(box->min.x(), cam.cx, 1e-3);
  EXPECT_NEAR(box->max.y(), cam.cy, 1e-3);
}

TEST(ProjectBoxTest, BehindCameraIsNotVisible) {
  TrackedObject o;
  o.position = Vec3(-10, 0, 0);
  o.frame = Frame::kAgent;
  EXPECT_FALSE(ProjectBox(o, CameraModel{}, AgentPose{}).has_value());
}

TEST(ProjectBoxTest, OutsideImageIsNotVisible) {
  TrackedObject o;
  o.position = Vec3(5, 30, 0);
  o.frame = Frame::kAgent;
  EXPECT_FALSE(ProjectBox(o, CameraModel{}, AgentPose{}).has_value());
}

TEST(ProjectBoxTest, StraddlingBorderIsClamped) {
  TrackedObject o;
  o.position = Vec3(5, 3.5, 0);
  o.dims = Vec3(1, 2, 1);
  o.frame = Frame::kAgent;
  const auto box = ProjectBox(o, CameraModel{}, AgentPose{});
  ASSERT_TRUE(box.has_value());
  EXPECT_EQ(box->min.x(), 0.0);
  EXPECT_GT(box->max.x(), 0.0);
}

TEST(ProjectBoxTest, DoublingDepthHalvesWidth) {
  const CameraModel cam;
  for (double d : {4.0, 7.0, 12.5}) {
    TrackedObject near_obj;
    near_obj.position = Vec3(d, 0, 0);
    near_obj.dims = Vec3(1e-6, 0.8, 0.8);
    near_obj.frame = Frame::kAgent;
    TrackedObject far_obj = near_obj;
    far_obj.position.x() = 2 * d;
    const auto a = ProjectBox(near_obj, cam, AgentPose{});
    const auto b = ProjectBox(far_obj, cam, AgentPose{});
    ASSERT_TRUE(a && b);
    const double wa = a->max.x() - a->min.x();
    const double wb = b->max.x() - b->min.x();
    EXPECT_NEAR(wa, 2 * wb, 1.0);
  }
}

TEST(ProjectBoxTest, WorldObjectUsesAgentPose) {
  const CameraModel cam;
  AgentPose agent = Pose(100, 50, kPi / 2);
  TrackedObject world;
  world.position = Vec3(100, 60, 0);
  world.frame = Frame::kWorld;
  TrackedObject local = world;
  local.position = Vec3(10, 0, 0);
  local.heading = -kPi / 2;
  local.frame = Frame::kAgent;
  const auto a = ProjectBox(world, cam, agent);
  const auto b = ProjectBox(local, cam, agent);
  ASSERT_TRUE(a && b);
  EXPECT_LT((a->min - b->min).norm(), 1e-9);
  EXPECT_LT((a->max - b->max).norm(), 1e-9);
}

TEST(CameraModelTest, ValidateIntrinsics) {
  CameraModel cam;
  EXPECT_NO_THROW(cam.Validate());
  cam.fx = 0;
  EXPECT_THROW(cam.Validate(), InvariantViolation);
  cam = CameraModel{};
  cam.cx = 700;
  EXPECT_THROW(cam.Validate(), InvariantViolation);
}

}  // namespace
}  // namespace coop
