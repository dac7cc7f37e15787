// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace coop {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Raised when a domain invariant is broken by a caller.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Signed time difference in microseconds.
struct Duration {
  std::int64_t micros = 0;

  static Duration FromSeconds(double s);
  double seconds() const { return static_cast<double>(micros) * 1e-6; }
  auto operator<=>(const Duration&) const = default;
};

// Microseconds since scenario start on the single simulated clock.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  explicit Timestamp(std::int64_t micros);

  static Timestamp FromSeconds(double s);

  std::int64_t micros() const { return micros_; }
  double seconds() const { return static_cast<double>(micros_) * 1e-6; }

  auto operator<=>(const Timestamp&) const = default;
  Duration operator-(const Timestamp& other) const {
    return Duration{micros_ - other.micros_};
  }
  Timestamp operator+(Duration d) const { return Timestamp(micros_ + d.micros); }

 private:
  std::int64_t micros_ = 0;
};

enum class ObjectClass : std::uint8_t {
  kCar = 0,
  kCyclist = 1,
  kPedestrian = 2,
  kUnknown = 3,
};
inline constexpr int kNumClasses = 4;
inline constexpr std::array<ObjectClass, kNumClasses> kAllClasses = {
    ObjectClass::kCar, ObjectClass::kCyclist, ObjectClass::kPedestrian,
    ObjectClass::kUnknown};

std::string_view ToString(ObjectClass c);
std::optional<ObjectClass> ParseObjectClass(std::string_view name);
std::optional<ObjectClass> ObjectClassFromCode(std::uint8_t code);

// Probability mass over ObjectClass, indexed by wire code.
class ClassDistribution {
 public:
  // Uniform distribution.
  ClassDistribution();

  static ClassDistribution Certain(ObjectClass c);
  // `label` receives `confidence`; the remainder is spread over the others.
  static ClassDistribution Peaked(ObjectClass label, double confidence);

  double prob(ObjectClass c) const { return probs_[static_cast<int>(c)]; }
  const std::array<double, kNumClasses>& probs() const { return probs_; }
  // Ties resolve to the lowest wire code.
  ObjectClass argmax() const;

  bool operator==(const ClassDistribution&) const = default;

 private:
  friend ClassDistribution NormalizeClassDist(
      const std::array<double, kNumClasses>& raw);
  std::array<double, kNumClasses> probs_;
};

ClassDistribution NormalizeClassDist(const std::array<double, kNumClasses>& raw);
ClassDistribution NormalizeClassDist(const std::map<ObjectClass, double>& raw);

enum class Source : std::uint8_t {
  kLidar = 0,
  kRadar = 1,
  kRgb = 2,
  kThermal = 3,
  kRemote = 4,
};
inline constexpr int kNumSources = 5;

std::string_view ToString(Source s);

class SourceMask {
 public:
  constexpr SourceMask() = default;
  constexpr explicit SourceMask(std::uint8_t bits) : bits_(bits & 0x1F) {}
  constexpr SourceMask(Source s)  // NOLINT: implicit by intent
      : bits_(static_cast<std::uint8_t>(1u << static_cast<int>(s))) {}

  constexpr bool has(Source s) const {
    return (bits_ >> static_cast<int>(s)) & 1u;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr SourceMask operator|(SourceMask o) const {
    return SourceMask(static_cast<std::uint8_t>(bits_ | o.bits_));
  }
  constexpr SourceMask& operator|=(SourceMask o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const SourceMask&) const = default;

  std::string ToString() const;

 private:
  std::uint8_t bits_ = 0;
};

// Which coordinate frame a TrackedObject is expressed in.
enum class Frame : std::uint8_t { kWorld, kAgent, kSensor };

// State layout of `cov`: (x, y, z, vx, vy, vz).
struct TrackedObject {
  std::uint32_t id = 0;
  ClassDistribution class_dist;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double heading = 0.0;
  Vec3 dims = Vec3::Ones();  // length, width, height
  Mat6 cov = Mat6::Identity();
  double existence = 0.0;
  Timestamp stamp;
  SourceMask sources;
  Frame frame = Frame::kWorld;

  ObjectClass label() const { return class_dist.argmax(); }
};

// Exact field-wise equality.
bool operator==(const TrackedObject& a, const TrackedObject& b);

// Throws InvariantViolation if `obj` breaks a TrackedObject invariant.
void Validate(const TrackedObject& obj);

// Symmetric with eigenvalues >= -1e-9.
bool IsSymmetricPsd(const Mat6& m, double tol = 1e-9);

struct AgentPose {
  std::uint32_t agent_id = 0;
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  Timestamp stamp;
};

// Maps any finite angle onto [-pi, pi); pi itself maps to -pi.
// Throws std::domain_error on non-finite input.
double WrapHeading(double theta);

inline double DegToRad(double deg) { return deg * kPi / 180.0; }
inline double RadToDeg(double rad) { return rad * 180.0 / kPi; }

}  // namespace coop
