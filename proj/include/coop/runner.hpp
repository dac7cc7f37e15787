// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// Discrete-time scenario execution: sensing, monitoring, fusion, message
// exchange and evaluation for the three comparison pipelines.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coop/fusion.hpp"
#include "coop/metrics.hpp"
#include "coop/monitor.hpp"
#include "coop/scenario.hpp"

namespace coop {

struct RunOptions {
  std::vector<metrics::Pipeline> pipelines = {metrics::Pipeline::kVehicle,
                                              metrics::Pipeline::kIntra,
                                              metrics::Pipeline::kInter};
  std::optional<std::uint64_t> seed;
  FusionConfig fusion;
  MonitorConfig monitor;
  // Evaluation and broadcast period.
  std::int64_t eval_period_micros = 100'000;
};

struct ArmCounters {
  std::uint64_t channel_polls = 0;
  std::uint64_t messages_fused = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t stale_messages = 0;
};

struct RunResult {
  metrics::EvalReport report;
  std::map<metrics::Pipeline, std::vector<metrics::EvalFrame>> frames;
  std::map<metrics::Pipeline, ArmCounters> counters;
  std::vector<HealthTransition> health;
  // Every broadcast message, concatenated in send order.
  std::vector<std::uint8_t> messages;
  std::uint64_t messages_sent = 0;
  std::string ground_truth_csv;
};

// Throws InvariantViolation when an internal invariant breaks.
RunResult RunScenario(const ScenarioConfig& scn, const RunOptions& opts = {});

// Writes report.csv, report.json, health.csv, messages.bin and
// ground_truth.csv into `dir`, creating it if needed.
void WriteRunOutputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace coop
