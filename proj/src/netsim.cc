// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace coop {
namespace {

constexpr double kModeTolerance = 1e-12;

double Mode(const ChannelConfig& cfg) {
  return 3.0 * cfg.mean_delay_s - cfg.min_delay_s - cfg.max_delay_s;
}

}  // namespace

void ChannelConfig::Validate() const {
  if (!(min_delay_s >= 0.0 && min_delay_s <= mean_delay_s && mean_delay_s <= max_delay_s)) {
    throw ConfigError("channel delays must satisfy 0 <= min <= mean <= max");
  }
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) {
    throw ConfigError("channel loss_prob outside [0,1]");
  }
  if (!(max_range_m >= 0.0)) throw ConfigError("channel max_range_m must be >= 0");
  const double mode = Mode(*this);
  if (mode < min_delay_s - kModeTolerance || mode > max_delay_s + kModeTolerance) {
    throw ConfigError("triangular delay mode " + std::to_string(mode) +
                      " s lies outside [min, max]; mean is not reachable");
  }
}

double SampleDelay(const ChannelConfig& cfg, Rng& rng) {
  cfg.Validate();
  const double a = cfg.min_delay_s;
  const double b = cfg.max_delay_s;
  const double u = rng.Uniform();
  if (b - a <= 0.0) return a;
  const double c = std::clamp(Mode(cfg), a, b);
  const double split = (c - a) / (b - a);
  const double x = u < split ? a + std::sqrt(u * (b - a) * (c - a))
                             : b - std::sqrt((1.0 - u) * (b - a) * (b - c));
  return std::clamp(x, a, b);
}

Channel::Channel(ChannelConfig cfg) : cfg_(cfg) { cfg_.Validate(); }

void Channel::RegisterReceiver(std::uint32_t id, const Vec3& position) {
  receivers_[id].position = position;
}

void Channel::UpdateReceiverPosition(std::uint32_t id, const Vec3& position) {
  auto it = receivers_.find(id);
  if (it == receivers_.end()) throw std::invalid_argument("unknown receiver");
  it->second.position = position;
}

void Channel::Broadcast(std::vector<std::uint8_t> payload, const AgentPose& sender,
                        std::uint16_t seq, Timestamp t, Rng& rng) {
  if (payload.empty()) throw std::invalid_argument("broadcast payload is empty");
  for (auto& [id, rx] : receivers_) {
    if (id == sender.agent_id) continue;
    const bool lost = rng.Uniform() < cfg_.loss_prob;
    const double delay = SampleDelay(cfg_, rng);
    const double distance = (rx.position - sender.position).norm();
    if (lost || distance > cfg_.max_range_m) continue;
    Delivery d;
    d.payload = payload;
    d.sender_id = sender.agent_id;
    d.seq = seq;
    d.send_time = t;
    d.arrival_time = t + Duration::FromSeconds(delay);
    rx.queue.push_back(std::move(d));
  }
}

std::vector<Delivery> Channel::Poll(std::uint32_t receiver_id, Timestamp t) {
  ++poll_count_;
  auto it = receivers_.find(receiver_id);
  if (it == receivers_.end()) throw std::invalid_argument("unknown receiver");
  Receiver& rx = it->second;
  if (rx.last_poll && t < *rx.last_poll) {
    throw std::logic_error("poll time went backwards for receiver " + std::to_string(receiver_id));
  }
  rx.last_poll = t;

  std::vector<Delivery> ready;
  std::vector<Delivery> waiting;
  for (Delivery& d : rx.queue) {
    (d.arrival_time <= t ? ready : waiting).push_back(std::move(d));
  }
  rx.queue = std::move(waiting);
  std::sort(ready.begin(), ready.end(), [](const Delivery& a, const Delivery& b) {
    return std::tie(a.arrival_time, a.sender_id, a.seq) <
           std::tie(b.arrival_time, b.sender_id, b.seq);
  });
  return ready;
}

std::size_t Channel::pending(std::uint32_t receiver_id) const {
  auto it = receivers_.find(receiver_id);
  return it == receivers_.end() ? 0 : it->second.queue.size();
}

}  // namespace coop
