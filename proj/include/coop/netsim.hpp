// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coop/core.hpp"
#include "coop/rng.hpp"

namespace coop {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ChannelConfig {
  double mean_delay_s = 0.003;
  double max_delay_s = 0.005;
  double min_delay_s = 0.001;
  double loss_prob = 0.0;
  double max_range_m = 1000.0;

  // Throws ConfigError.
  void Validate() const;
};

// One-way delay drawn from a triangular distribution on [min, max] whose mode
// 3*mean - min - max puts its mean at mean_delay_s. Throws ConfigError when
// that mode falls outside [min, max].
double SampleDelay(const ChannelConfig& cfg, Rng& rng);

struct Delivery {
  std::vector<std::uint8_t> payload;
  std::uint32_t sender_id = 0;
  std::uint16_t seq = 0;
  Timestamp send_time;
  Timestamp arrival_time;
};

// Single-hop broadcast medium without acknowledgements or retransmission.
// Single writer: all calls happen from the simulation loop.
class Channel {
 public:
  explicit Channel(ChannelConfig cfg);

  const ChannelConfig& config() const { return cfg_; }

  void RegisterReceiver(std::uint32_t id, const Vec3& position);
  void UpdateReceiverPosition(std::uint32_t id, const Vec3& position);

  // Schedules delivery of `payload` to every other registered receiver within
  // range. One loss draw and one delay draw are consumed per receiver in id
  // order, independent of distance. Throws std::invalid_argument for an
  // empty payload.
  void Broadcast(std::vector<std::uint8_t> payload, const AgentPose& sender, std::uint16_t seq,
                 Timestamp t, Rng& rng);

  // Messages for `receiver_id` with arrival_time <= t not yet polled, ordered
  // by (arrival_time, sender_id, seq). Throws std::logic_error if t goes
  // backwards for this receiver.
  std::vector<Delivery> Poll(std::uint32_t receiver_id, Timestamp t);

  std::uint64_t poll_count() const { return poll_count_; }
  std::size_t pending(std::uint32_t receiver_id) const;

 private:
  struct Receiver {
    Vec3 position = Vec3::Zero();
    std::vector<Delivery> queue;
    std::optional<Timestamp> last_poll;
  };

  ChannelConfig cfg_;
  std::map<std::uint32_t, Receiver> receivers_;
  std::uint64_t poll_count_ = 0;
};

}  // namespace coop
