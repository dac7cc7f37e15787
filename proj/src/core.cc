// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/core.hpp"

#include <cctype>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace coop {

Duration Duration::FromSeconds(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

Timestamp::Timestamp(std::int64_t micros) : micros_(micros) {
  if (micros < 0) {
    throw InvariantViolation("timestamp must be non-negative");
  }
}

Timestamp Timestamp::FromSeconds(double s) {
  return Timestamp(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

std::string_view ToString(ObjectClass c) {
  switch (c) {
    case ObjectClass::kCar: return "Car";
    case ObjectClass::kCyclist: return "Cyclist";
    case ObjectClass::kPedestrian: return "Pedestrian";
    case ObjectClass::kUnknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<ObjectClass> ParseObjectClass(std::string_view name) {
  for (ObjectClass c : kAllClasses) {
    std::string_view canon = ToString(c);
    if (name.size() != canon.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(name[i])) !=
          std::tolower(static_cast<unsigned char>(canon[i]))) {
        same = false;
        break;
      }
    }
    if (same) return c;
  }
  return std::nullopt;
}

std::optional<ObjectClass> ObjectClassFromCode(std::uint8_t code) {
  if (code >= kNumClasses) return std::nullopt;
  return static_cast<ObjectClass>(code);
}

ClassDistribution::ClassDistribution() { probs_.fill(1.0 / kNumClasses); }

ClassDistribution ClassDistribution::Certain(ObjectClass c) {
  ClassDistribution d;
  d.probs_.fill(0.0);
  d.probs_[static_cast<int>(c)] = 1.0;
  return d;
}

ClassDistribution ClassDistribution::Peaked(ObjectClass label,
                                            double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw InvariantViolation("class confidence outside [0,1]");
  }
  ClassDistribution d;
  const double rest = (1.0 - confidence) / (kNumClasses - 1);
  d.probs_.fill(rest);
  d.probs_[static_cast<int>(label)] = confidence;
  return d;
}

ObjectClass ClassDistribution::argmax() const {
  int best = 0;
  for (int i = 1; i < kNumClasses; ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return static_cast<ObjectClass>(best);
}

ClassDistribution NormalizeClassDist(
    const std::array<double, kNumClasses>& raw) {
  double total = 0.0;
  for (double w : raw) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvariantViolation("class weight must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvariantViolation("class weights are all zero");
  }
  ClassDistribution d;
  for (int i = 0; i < kNumClasses; ++i) d.probs_[i] = raw[i] / total;
  return d;
}

ClassDistribution NormalizeClassDist(const std::map<ObjectClass, double>& raw) {
  std::array<double, kNumClasses> dense{};
  for (const auto& [c, w] : raw) dense[static_cast<int>(c)] = w;
  return NormalizeClassDist(dense);
}

std::string_view ToString(Source s) {
  switch (s) {
    case Source::kLidar: return "LiDAR";
    case Source::kRadar: return "Radar";
    case Source::kRgb: return "RGB";
    case Source::kThermal: return "Thermal";
    case Source::kRemote: return "Remote";
  }
  return "?";
}

std::string SourceMask::ToString() const {
  std::string out;
  for (int i = 0; i < kNumSources; ++i) {
    const auto s = static_cast<Source>(i);
    if (!has(s)) continue;
    if (!out.empty()) out += '|';
    out += coop::ToString(s);
  }
  return out.empty() ? std::string("-") : out;
}

bool IsSymmetricPsd(const Mat6& m, double tol) {
  if (!m.allFinite()) return false;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Mat6> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

void Validate(const TrackedObject& obj) {
  if (!obj.position.allFinite() || !obj.velocity.allFinite()) {
    throw InvariantViolation("non-finite object state");
  }
  if ((obj.dims.array() <= 0.0).any() || !obj.dims.allFinite()) {
    throw InvariantViolation("object dims must be positive");
  }
  if (!(obj.existence >= 0.0 && obj.existence <= 1.0)) {
    throw InvariantViolation("existence outside [0,1]");
  }
  if (!(obj.heading >= -kPi && obj.heading < kPi)) {
    throw InvariantViolation("heading not wrapped");
  }
  if (!IsSymmetricPsd(obj.cov)) {
    throw InvariantViolation("covariance not symmetric PSD");
  }
}

bool operator==(const TrackedObject& a, const TrackedObject& b) {
  return a.id == b.id && a.class_dist == b.class_dist && a.position == b.position &&
         a.velocity == b.velocity && a.heading == b.heading && a.dims == b.dims &&
         a.cov == b.cov && a.existence == b.existence && a.stamp == b.stamp &&
         a.sources == b.sources && a.frame == b.frame;
}

double WrapHeading(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("heading must be finite");
  }
  if (theta >= -kPi && theta < kPi) return theta;
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  r -= kPi;
  if (r >= kPi) r -= kTwoPi;
  if (r < -kPi) r = -kPi;
  return r;
}

}  // namespace coop
