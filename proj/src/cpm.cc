// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coop::cpm {
namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) { Be(v, 2); }
  void U32(std::uint32_t v) { Be(v, 4); }
  void U48(std::uint64_t v) { Be(v, 6); }
  void I16(std::int16_t v) { U16(static_cast<std::uint16_t>(v)); }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }

 private:
  void Be(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::size_t pos) : in_(in), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  std::uint8_t U8() { return in_[pos_++]; }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Be(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Be(4)); }
  std::uint64_t U48() { return Be(6); }
  std::int16_t I16() { return static_cast<std::int16_t>(U16()); }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }

 private:
  std::uint64_t Be(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_;
};

template <typename Int>
Int Quantize(double value, double scale, const char* field) {
  const double q = std::round(value * scale);
  if (!std::isfinite(q) || q < static_cast<double>(std::numeric_limits<Int>::min()) ||
      q > static_cast<double>(std::numeric_limits<Int>::max())) {
    throw EncodeRangeError(field);
  }
  return static_cast<Int>(q);
}

std::uint16_t HeadingCentideg(double heading, const char* field) {
  if (!std::isfinite(heading)) throw EncodeRangeError(field);
  const double deg = RadToDeg(WrapHeading(heading));
  long long cd = std::llround(deg * 100.0) % 36000;
  if (cd < 0) cd += 36000;
  return static_cast<std::uint16_t>(cd);
}

double HeadingFromCentideg(std::uint16_t cd) {
  return WrapHeading(DegToRad(static_cast<double>(cd) / 100.0));
}

double StdDev(const Mat6& cov, int i) { return std::sqrt(std::max(0.0, cov(i, i))); }

void EncodeObject(const TrackedObject& obj, Writer& w) {
  const ObjectClass label = obj.class_dist.argmax();
  w.U32(obj.id);
  w.U8(static_cast<std::uint8_t>(label));
  w.U8(Quantize<std::uint8_t>(obj.class_dist.prob(label), 255.0, "class_conf"));
  w.U8(Quantize<std::uint8_t>(obj.existence, 255.0, "existence"));
  w.U8(obj.sources.bits());
  for (int i = 0; i < 3; ++i) w.I32(Quantize<std::int32_t>(obj.position[i], 100.0, "position"));
  for (int i = 0; i < 3; ++i) w.I16(Quantize<std::int16_t>(obj.velocity[i], 100.0, "velocity"));
  w.U16(HeadingCentideg(obj.heading, "heading"));
  for (int i = 0; i < 3; ++i) {
    const auto d = Quantize<std::uint16_t>(obj.dims[i], 100.0, "dims");
    if (d == 0) throw EncodeRangeError("dims");
    w.U16(d);
  }
  for (int i = 0; i < 6; ++i) w.U8(QuantizeSigma(StdDev(obj.cov, i)));
}

}  // namespace

EncodeRangeError::EncodeRangeError(std::string field)
    : std::runtime_error("encode: field out of range: " + field), field_(std::move(field)) {}

const char* ToString(DecodeErrorCode code) {
  switch (code) {
    case DecodeErrorCode::kBadMagic: return "BadMagic";
    case DecodeErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case DecodeErrorCode::kTruncated: return "Truncated";
    case DecodeErrorCode::kMalformed: return "Malformed";
  }
  return "?";
}

DecodeError::DecodeError(DecodeErrorCode code, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(ToString(code)) + " at byte " + std::to_string(offset) +
                         ": " + detail),
      code_(code),
      offset_(offset) {}

std::uint8_t QuantizeSigma(double sigma_m) {
  if (std::isnan(sigma_m)) return 255;
  const double cm = std::max(sigma_m * 100.0, 1.0);
  const double code = std::round(32.0 * std::log2(cm));
  return static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0));
}

double DequantizeSigma(std::uint8_t code) {
  return std::exp2(static_cast<double>(code) / 32.0) / 100.0;
}

void EncodeTo(const CpmMessage& msg, std::vector<std::uint8_t>& out) {
  if (msg.objects.size() > kMaxObjects) throw EncodeRangeError("object_count");
  if (msg.type == MessageType::kCam && !msg.objects.empty()) {
    throw InvariantViolation("CAM messages carry no objects");
  }
  const auto stamp = static_cast<std::uint64_t>(msg.sender.stamp.micros());
  if (stamp > kMaxStampMicros) throw EncodeRangeError("stamp");
  for (const TrackedObject& obj : msg.objects) {
    if (obj.stamp > msg.sender.stamp) {
      throw InvariantViolation("object stamp is later than the sender stamp");
    }
  }

  // Encode into scratch first so a range error leaves `out` untouched.
  std::vector<std::uint8_t> buf;
  buf.reserve(MessageSize(msg.objects.size()));
  Writer w(buf);
  w.U16(kMagic);
  w.U8(kVersion);
  w.U8(static_cast<std::uint8_t>(msg.type));
  w.U32(msg.sender.agent_id);
  w.U48(stamp);
  for (int i = 0; i < 3; ++i) w.I32(Quantize<std::int32_t>(msg.sender.position[i], 100.0, "pose"));
  w.U16(HeadingCentideg(msg.sender.heading, "pose_heading"));
  w.U8(static_cast<std::uint8_t>(msg.objects.size()));
  w.U16(msg.seq);
  w.U8(0);
  for (const TrackedObject& obj : msg.objects) EncodeObject(obj, w);
  out.insert(out.end(), buf.begin(), buf.end());
}

std::vector<std::uint8_t> Encode(const CpmMessage& msg) {
  std::vector<std::uint8_t> out;
  EncodeTo(msg, out);
  return out;
}

std::optional<std::size_t> AnnouncedSize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return std::nullopt;
  return MessageSize(bytes[28]);
}

CpmMessage Decode(std::span<const std::uint8_t> bytes) {
  using E = DecodeErrorCode;
  if (bytes.size() < 2) throw DecodeError(E::kTruncated, bytes.size(), "no magic");
  const std::uint16_t magic = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
  if (magic != kMagic) throw DecodeError(E::kBadMagic, 0, "unexpected magic");
  if (bytes.size() < 3) throw DecodeError(E::kTruncated, bytes.size(), "no version");
  if (bytes[2] != kVersion) {
    throw DecodeError(E::kUnsupportedVersion, 2, "version " + std::to_string(bytes[2]));
  }
  if (bytes.size() < kHeaderSize) {
    throw DecodeError(E::kTruncated, bytes.size(), "header needs 32 bytes");
  }
  const std::size_t count = bytes[28];
  if (bytes.size() != MessageSize(count)) {
    throw DecodeError(E::kTruncated, std::min(bytes.size(), MessageSize(count)),
                      "length " + std::to_string(bytes.size()) + " but header announces " +
                          std::to_string(MessageSize(count)));
  }

  Reader r(bytes, 3);
  CpmMessage msg;
  const std::uint8_t type = r.U8();
  if (type != 1 && type != 2) throw DecodeError(E::kMalformed, 3, "unknown msg_type");
  msg.type = static_cast<MessageType>(type);
  msg.sender.agent_id = r.U32();
  msg.sender.stamp = Timestamp(static_cast<std::int64_t>(r.U48()));
  for (int i = 0; i < 3; ++i) msg.sender.position[i] = r.I32() / 100.0;
  const std::uint16_t pose_cd = r.U16();
  if (pose_cd >= 36000) throw DecodeError(E::kMalformed, 26, "pose heading out of range");
  msg.sender.heading = HeadingFromCentideg(pose_cd);
  r.U8();  // count, already read
  msg.seq = r.U16();
  if (r.U8() != 0) throw DecodeError(E::kMalformed, 31, "pad byte not zero");
  if (msg.type == MessageType::kCam && count != 0) {
    throw DecodeError(E::kMalformed, 28, "CAM with objects");
  }

  msg.objects.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t base = r.pos();
    TrackedObject obj;
    obj.id = r.U32();
    const auto label = ObjectClassFromCode(r.U8());
    if (!label) throw DecodeError(E::kMalformed, base + 4, "unknown class code");
    const std::uint8_t conf = r.U8();
    // The argmax of four classes holds at least a quarter of the mass.
    if (conf < 64) throw DecodeError(E::kMalformed, base + 5, "class confidence below 1/4");
    obj.class_dist = ClassDistribution::Peaked(*label, conf / 255.0);
    obj.existence = r.U8() / 255.0;
    const std::uint8_t flags = r.U8();
    if (flags & 0xE0) throw DecodeError(E::kMalformed, base + 7, "reserved flag bits set");
    obj.sources = SourceMask(flags);
    for (int i = 0; i < 3; ++i) obj.position[i] = r.I32() / 100.0;
    for (int i = 0; i < 3; ++i) obj.velocity[i] = r.I16() / 100.0;
    const std::uint16_t cd = r.U16();
    if (cd >= 36000) throw DecodeError(E::kMalformed, base + 26, "heading out of range");
    obj.heading = HeadingFromCentideg(cd);
    for (int i = 0; i < 3; ++i) {
      const std::uint16_t d = r.U16();
      if (d == 0) throw DecodeError(E::kMalformed, base + 28 + 2 * i, "zero dimension");
      obj.dims[i] = d / 100.0;
    }
    obj.cov = Mat6::Zero();
    for (int i = 0; i < 6; ++i) {
      const double s = DequantizeSigma(r.U8());
      obj.cov(i, i) = s * s;
    }
    obj.stamp = msg.sender.stamp;
    obj.frame = Frame::kAgent;
    msg.objects.push_back(std::move(obj));
  }
  return msg;
}

}  // namespace coop::cpm
