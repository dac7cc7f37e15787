// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <span>

namespace coop {

struct InspectSummary {
  std::size_t messages = 0;
  std::size_t objects = 0;
  // Decode failures and unparseable gaps.
  std::size_t problems = 0;
};

// Human-readable dump of concatenated wire messages. Malformed or truncated
// regions are reported with their byte offsets and scanning resumes at the
// next magic number.
InspectSummary InspectMessages(std::span<const std::uint8_t> bytes, std::ostream& os);

}  // namespace coop
