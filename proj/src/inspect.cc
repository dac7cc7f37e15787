// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/inspect.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "coop/cpm.hpp"

namespace coop {
namespace {

bool MagicAt(std::span<const std::uint8_t> bytes, std::size_t pos) {
  return pos + 1 < bytes.size() && bytes[pos] == (cpm::kMagic >> 8) && bytes[pos + 1] == (cpm::kMagic & 0xFF);
}

std::size_t NextMagic(std::span<const std::uint8_t> bytes, std::size_t from) {
  std::size_t pos = from;
  while (pos < bytes.size() && !MagicAt(bytes, pos)) ++pos;
  return pos;
}

void PrintMessage(const cpm::CpmMessage& msg, std::size_t offset, std::size_t size, std::size_t index,
                  std::ostream& os) {
  char line[512];
  std::snprintf(line, sizeof(line),
                "message %zu @%zu: type=%s sender=%u seq=%u stamp_us=%lld pos=(%.2f, %.2f, %.2f) "
                "heading_deg=%.2f objects=%zu size=%zu\n",
                index, offset, msg.type == cpm::MessageType::kCpm ? "CPM" : "CAM", msg.sender.agent_id,
                static_cast<unsigned>(msg.seq), static_cast<long long>(msg.sender.stamp.micros()),
                msg.sender.position.x(), msg.sender.position.y(), msg.sender.position.z(),
                RadToDeg(msg.sender.heading), msg.objects.size(), size);
  os << line;
  for (std::size_t i = 0; i < msg.objects.size(); ++i) {
    const TrackedObject& o = msg.objects[i];
    std::snprintf(line, sizeof(line),
                  "  object %zu @%zu: id=%u class=%s conf=%.3f existence=%.3f pos=(%.2f, %.2f, %.2f) "
                  "vel=(%.2f, %.2f, %.2f) heading_deg=%.2f dims=(%.2f, %.2f, %.2f) "
                  "sigma=(%.3f, %.3f, %.3f, %.3f, %.3f, %.3f)\n",
                  i, offset + cpm::kHeaderSize + i * cpm::kObjectSize, o.id,
                  std::string(ToString(o.label())).c_str(), o.class_dist.prob(o.label()), o.existence,
                  o.position.x(), o.position.y(), o.position.z(), o.velocity.x(), o.velocity.y(),
                  o.velocity.z(), RadToDeg(o.heading), o.dims.x(), o.dims.y(), o.dims.z(),
                  std::sqrt(o.cov(0, 0)), std::sqrt(o.cov(1, 1)), std::sqrt(o.cov(2, 2)),
                  std::sqrt(o.cov(3, 3)), std::sqrt(o.cov(4, 4)), std::sqrt(o.cov(5, 5)));
    os << line;
  }
}

}  // namespace

InspectSummary InspectMessages(std::span<const std::uint8_t> bytes, std::ostream& os) {
  InspectSummary sum;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (!MagicAt(bytes, pos)) {
      const std::size_t next = NextMagic(bytes, pos + 1);
      os << "unparseable bytes @" << pos << ".." << next << " (" << next - pos << " bytes)\n";
      ++sum.problems;
      pos = next;
      continue;
    }
    const std::span<const std::uint8_t> rest = bytes.subspan(pos);
    const std::optional<std::size_t> size = cpm::AnnouncedSize(rest);
    if (!size || *size > rest.size()) {
      os << "Truncated @" << pos << ": message needs " << (size ? *size : cpm::kHeaderSize)
         << " bytes, " << rest.size() << " available\n";
      ++sum.problems;
      break;
    }
    try {
      const cpm::CpmMessage msg = cpm::Decode(rest.first(*size));
      PrintMessage(msg, pos, *size, sum.messages, os);
      ++sum.messages;
      sum.objects += msg.objects.size();
      pos += *size;
    } catch (const cpm::DecodeError& e) {
      os << cpm::ToString(e.code()) << " @" << pos + e.offset() << ": " << e.what() << "\n";
      ++sum.problems;
      pos = NextMagic(bytes, pos + 1);
    }
  }
  os << "total size " << bytes.size() << "\n";
  return sum;
}

}  // namespace coop
