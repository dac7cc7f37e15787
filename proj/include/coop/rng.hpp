// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace coop {

// Counter-based generator: output i of stream s under seed k is a pure
// function of (k, s, i), so streams are reproducible on every platform and
// substreams never overlap. The integer stream is bit-exact everywhere;
// Normal() goes through libm and is exact only per toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent child stream keyed by `tag` (e.g. a sensor id).
  Rng Substream(std::uint64_t tag) const;

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal(double mean = 0.0, double stddev = 1.0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace coop
