// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Fixed-layout binary codec for perception messages exchanged over V2X.
//
// All multi-byte fields are big-endian. A message is a 32-byte header followed
// by `object_count` 40-byte object records:
//
//   header                          object record
//   off size field                  off size field
//     0  2  magic 0xC1A0              0  4  track_id
//     2  1  version (1)               4  1  class code
//     3  1  msg_type (1 CPM, 2 CAM)   5  1  argmax class prob x255
//     4  4  sender_id                 6  1  existence x255
//     8  6  stamp, microseconds       7  1  flags (bits 0..4 source mask)
//    14 12  pose x,y,z  i32 cm        8 12  pos x,y,z   i32 cm
//    26  2  heading centideg         20  6  vel x,y,z   i16 cm/s
//    28  1  object_count             26  2  heading centideg [0, 36000)
//    29  2  seq                      28  6  dims l,w,h  u16 cm
//    31  1  pad (0)                  34  3  pos sigma   log code
//                                    37  3  vel sigma   log code
//
// Sigma codes are clamp(round(32 * log2(max(sigma_cm, 1))), 0, 255).

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop/core.hpp"

namespace coop::cpm {

inline constexpr std::uint16_t kMagic = 0xC1A0;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 32;
inline constexpr std::size_t kObjectSize = 40;
inline constexpr std::size_t kMaxObjects = 255;
inline constexpr std::uint64_t kMaxStampMicros = (std::uint64_t{1} << 48) - 1;

constexpr std::size_t MessageSize(std::size_t object_count) {
  return kHeaderSize + kObjectSize * object_count;
}

enum class MessageType : std::uint8_t { kCpm = 1, kCam = 2 };

struct CpmMessage {
  MessageType type = MessageType::kCpm;
  AgentPose sender;
  // Expressed in the sender's frame.
  std::vector<TrackedObject> objects;
  std::uint16_t seq = 0;
};

// A quantized field does not fit its wire slot.
class EncodeRangeError : public std::runtime_error {
 public:
  explicit EncodeRangeError(std::string field);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class DecodeErrorCode { kBadMagic, kUnsupportedVersion, kTruncated, kMalformed };
const char* ToString(DecodeErrorCode code);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorCode code, std::size_t offset, const std::string& detail);
  DecodeErrorCode code() const { return code_; }
  // Byte offset of the offending field within the input.
  std::size_t offset() const { return offset_; }

 private:
  DecodeErrorCode code_;
  std::size_t offset_;
};

// Throws EncodeRangeError for out-of-range fields and InvariantViolation when
// the message itself is inconsistent (too many objects, future object
// stamps, CAM with objects).
std::vector<std::uint8_t> Encode(const CpmMessage& msg);
// Appends the encoding of `msg` to `out`.
void EncodeTo(const CpmMessage& msg, std::vector<std::uint8_t>& out);

// Inverse of Encode up to quantization. Throws DecodeError. Object stamps are
// the header stamp, covariances are diagonal and objects are tagged kAgent.
CpmMessage Decode(std::span<const std::uint8_t> bytes);

// Total size announced by a readable header at the start of `bytes`, or
// nullopt when fewer than kHeaderSize bytes are available.
std::optional<std::size_t> AnnouncedSize(std::span<const std::uint8_t> bytes);

std::uint8_t QuantizeSigma(double sigma_m);
// Bin center in meters.
double DequantizeSigma(std::uint8_t code);

}  // namespace coop::cpm
