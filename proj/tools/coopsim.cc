// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

// coopsim: runs scenarios through the fusion pipelines and dumps wire logs.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coop/cpm.hpp"
#include "coop/inspect.hpp"
#include "coop/runner.hpp"
#include "coop/scenario.hpp"

namespace {

constexpr int kExitLoad = 2;
constexpr int kExitInvariant = 3;

std::vector<coop::metrics::Pipeline> ParsePipelines(const std::string& list, std::string& bad) {
  std::vector<coop::metrics::Pipeline> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto p = coop::metrics::ParsePipeline(item);
    if (!p) {
      bad = item;
      return {};
    }
    if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
  }
  return out;
}

int Run(const CLI::App& app, const std::string& scenario_path, const std::string& pipelines,
        const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
  std::string bad;
  coop::RunOptions opts;
  opts.pipelines = ParsePipelines(pipelines, bad);
  if (opts.pipelines.empty()) {
    std::cerr << "error: unknown pipeline '" << bad << "' (valid: vehicle, intra, inter)\n\n"
              << app.help();
    return kExitLoad;
  }
  opts.seed = seed;

  coop::ScenarioConfig scn;
  try {
    scn = coop::LoadScenario(scenario_path);
  } catch (const coop::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLoad;
  }
  try {
    const coop::RunResult result = coop::RunScenario(scn, opts);
    coop::WriteRunOutputs(result, out_dir);
    std::cout << "scenario " << scn.name << ": " << result.messages_sent << " messages, "
              << result.messages.size() << " bytes; outputs in " << out_dir << "\n";
  } catch (const coop::InvariantViolation& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  }
  return 0;
}

int Inspect(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitLoad;
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  coop::InspectMessages(bytes, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative perception simulator and fusion evaluator"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print scenario schema and wire format versions");

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write reports");
  std::string scenario_path;
  std::string pipelines = "vehicle,intra,inter";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--pipelines", pipelines, "Comma-separated subset of vehicle,intra,inter");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");

  CLI::App* inspect = app.add_subcommand("inspect", "Dump a file of wire messages");
  std::string inspect_path;
  inspect->add_option("file", inspect_path, "File with concatenated messages")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitLoad;
  }

  if (version) {
    std::cout << "coopsim scenario-schema " << coop::kScenarioSchemaVersion << " wire-version "
              << static_cast<int>(coop::cpm::kVersion) << "\n";
    return 0;
  }
  if (run->parsed()) return Run(*run, scenario_path, pipelines, out_dir, seed);
  if (inspect->parsed()) return Inspect(inspect_path);
  std::cout << app.help();
  return kExitLoad;
}
