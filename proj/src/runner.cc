// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/runner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coop/cpm.hpp"
#include "coop/netsim.hpp"

namespace coop {
namespace {

using metrics::Pipeline;

constexpr std::uint64_t kChannelStreamTag = 0xC4A77E1ull;

SensorInfo InfoFor(const SensorModel& m) {
  SensorInfo info;
  info.sensor_id = m.sensor_id;
  info.modality = m.modality;
  info.mount = m.mount;
  info.fov_rad = m.fov_rad;
  info.max_range_m = m.max_range_m;
  info.confidence = m.confidence;
  info.frame_period_s = static_cast<double>(m.period_micros()) * 1e-6;
  info.camera = m.camera;
  return info;
}

struct AgentState {
  const AgentSpec* spec = nullptr;
  std::vector<SensorSimulator> sims;
  Monitor monitor;
  SensorRig rig;
  TrackTable intra;
  std::vector<TrackedObject> published;
  std::uint16_t seq = 0;

  AgentState(const AgentSpec& s, std::uint64_t seed, const MonitorConfig& mcfg)
      : spec(&s), monitor(mcfg) {
    for (const SensorModel& m : s.sensors) {
      sims.emplace_back(m, seed);
      monitor.RegisterSensor(m.sensor_id, Duration{m.period_micros()}, Timestamp(m.phase_micros));
      rig[m.sensor_id] = InfoFor(m);
    }
  }
};

struct Arm {
  Pipeline pipeline;
  TrackTable table;
  std::vector<TrackedObject> published;
};

std::vector<metrics::EvalPrediction> ToPredictions(const std::vector<TrackedObject>& objs) {
  std::vector<metrics::EvalPrediction> out;
  out.reserve(objs.size());
  for (const TrackedObject& o : objs) {
    metrics::EvalPrediction p;
    p.track_id = o.id;
    p.cls = o.label();
    p.box = BevBoxOf(o);
    p.position = o.position.head<2>();
    p.score = o.existence;
    out.push_back(p);
  }
  return out;
}

std::vector<metrics::EvalGroundTruth> ToGroundTruth(const std::vector<GroundTruthActor>& truth,
                                                    const Vec3& ego, double radius) {
  std::vector<metrics::EvalGroundTruth> out;
  for (const GroundTruthActor& g : truth) {
    if ((g.position.head<2>() - ego.head<2>()).norm() > radius) continue;
    metrics::EvalGroundTruth e;
    e.actor_id = g.id;
    e.cls = g.cls;
    e.box = BevBox{g.position.head<2>(), g.dims.x(), g.dims.y(), g.heading};
    e.position = g.position.head<2>();
    out.push_back(e);
  }
  return out;
}

// The sender's published tracks in its own frame, most confident first when
// the list exceeds the wire limit.
cpm::CpmMessage BuildMessage(const AgentState& agent, const AgentPose& pose) {
  cpm::CpmMessage msg;
  msg.sender = pose;
  msg.seq = agent.seq;
  std::vector<TrackedObject> objs = agent.published;
  if (objs.size() > cpm::kMaxObjects) {
    std::stable_sort(objs.begin(), objs.end(), [](const TrackedObject& a, const TrackedObject& b) {
      return a.existence > b.existence;
    });
    objs.resize(cpm::kMaxObjects);
  }
  for (const TrackedObject& o : objs) {
    TrackedObject local = ToLocal(o, pose);
    local.stamp = pose.stamp;
    msg.objects.push_back(std::move(local));
  }
  return msg;
}

bool Wants(const RunOptions& opts, Pipeline p) {
  return std::find(opts.pipelines.begin(), opts.pipelines.end(), p) != opts.pipelines.end();
}

}  // namespace

RunResult RunScenario(const ScenarioConfig& scn, const RunOptions& opts) {
  scn.Validate();
  opts.fusion.Validate();
  if (opts.pipelines.empty()) throw std::invalid_argument("at least one pipeline is required");
  if (opts.eval_period_micros <= 0 || opts.eval_period_micros % kTickMicros != 0) {
    throw std::invalid_argument("eval period must be a positive multiple of the tick");
  }
  const std::uint64_t seed = opts.seed.value_or(scn.seed);
  const FusionConfig& fcfg = opts.fusion;

  std::vector<AgentState> agents;
  agents.reserve(scn.agents.size());
  for (const AgentSpec& spec : scn.agents) agents.emplace_back(spec, seed, opts.monitor);
  std::sort(agents.begin(), agents.end(),
            [](const AgentState& a, const AgentState& b) { return a.spec->id < b.spec->id; });
  AgentState* ego = nullptr;
  for (AgentState& a : agents) {
    if (a.spec->id == scn.ego_agent) ego = &a;
  }

  Channel channel(scn.channel);
  Rng channel_rng = Rng(seed).Substream(kChannelStreamTag);
  channel.RegisterReceiver(ego->spec->id, ego->spec->PoseAt(Timestamp()).position);

  std::vector<Arm> arms;
  for (Pipeline p : {Pipeline::kVehicle, Pipeline::kIntra, Pipeline::kInter}) {
    if (Wants(opts, p)) arms.push_back(Arm{p, {}, {}});
  }

  RunResult result;
  for (const Arm& arm : arms) {
    result.frames[arm.pipeline];
    result.counters[arm.pipeline];
  }
  std::ostringstream gt_csv;
  WriteGroundTruthHeader(gt_csv);

  const std::int64_t end_micros = static_cast<std::int64_t>(std::llround(scn.duration_s * 1e6));
  for (std::int64_t us = 0; us <= end_micros; us += kTickMicros) {
    const Timestamp t(us);
    const bool eval_tick = us % opts.eval_period_micros == 0;
    std::vector<SensorFrame> ego_frames;

    for (AgentState& agent : agents) {
      const AgentPose pose = agent.spec->PoseAt(t);
      std::vector<SensorFrame> frames;
      for (SensorSimulator& sim : agent.sims) {
        const SensorModel& m = sim.model();
        if (!m.FiresAt(t)) continue;
        std::optional<SensorFrame> frame = sim.Step(scn, pose, t);
        agent.monitor.Observe(m.sensor_id, frame, t);
        agent.rig[m.sensor_id].trust = agent.monitor.Classify(m.sensor_id, t).trust;
        if (frame) frames.push_back(std::move(*frame));
      }
      if (!frames.empty() || eval_tick) {
        agent.published = IntraFuseStep(agent.intra, frames, pose, agent.rig, fcfg, t);
      }
      if (&agent == ego) ego_frames = frames;

      if (eval_tick) {
        const cpm::CpmMessage msg = BuildMessage(agent, pose);
        std::vector<std::uint8_t> bytes = cpm::Encode(msg);
        result.messages.insert(result.messages.end(), bytes.begin(), bytes.end());
        ++result.messages_sent;
        channel.Broadcast(std::move(bytes), pose, agent.seq, t, channel_rng);
        ++agent.seq;
      }
    }

    const AgentPose ego_pose = ego->spec->PoseAt(t);
    channel.UpdateReceiverPosition(ego->spec->id, ego_pose.position);
    for (Arm& arm : arms) {
      if (arm.pipeline == Pipeline::kVehicle) {
        std::vector<SensorFrame> lidar;
        for (const SensorFrame& f : ego_frames) {
          if (f.modality == Modality::kLidar) lidar.push_back(f);
        }
        if (!lidar.empty() || eval_tick) {
          arm.published = IntraFuseStep(arm.table, lidar, ego_pose, ego->rig, fcfg, t);
        }
        continue;
      }
      if (!ego_frames.empty() || eval_tick) {
        arm.published = IntraFuseStep(arm.table, ego_frames, ego_pose, ego->rig, fcfg, t);
      }
      if (arm.pipeline != Pipeline::kInter) continue;
      ArmCounters& counters = result.counters[arm.pipeline];
      ++counters.channel_polls;
      for (const Delivery& d : channel.Poll(ego->spec->id, t)) {
        cpm::CpmMessage msg;
        try {
          msg = cpm::Decode(d.payload);
        } catch (const cpm::DecodeError&) {
          ++counters.decode_errors;
          continue;
        }
        arm.published = InterFuseStep(arm.table, msg, ego_pose, fcfg, t);
        ++counters.messages_fused;
      }
      counters.stale_messages = arm.table.stale_messages();
      if (eval_tick) {
        arm.table.PredictAll(t, fcfg);
        arm.published = Publish(arm.table, fcfg);
      }
    }

    if (eval_tick) {
      const std::vector<GroundTruthActor> truth = WorldAt(scn, t);
      WriteGroundTruthRows(gt_csv, t, truth);
      const std::vector<metrics::EvalGroundTruth> gts =
          ToGroundTruth(truth, ego_pose.position, scn.eval_radius_m);
      for (const Arm& arm : arms) {
        metrics::EvalFrame f;
        f.stamp = t;
        f.preds = ToPredictions(arm.published);
        f.gts = gts;
        result.frames[arm.pipeline].push_back(std::move(f));
      }
    }
  }

  for (const Arm& arm : arms) {
    result.report[arm.pipeline] = metrics::Evaluate(result.frames[arm.pipeline]);
  }
  for (const AgentState& agent : agents) {
    const auto& tr = agent.monitor.transitions();
    result.health.insert(result.health.end(), tr.begin(), tr.end());
  }
  std::stable_sort(result.health.begin(), result.health.end(),
                   [](const HealthTransition& a, const HealthTransition& b) {
                     return std::tie(a.t, a.sensor_id) < std::tie(b.t, b.sensor_id);
                   });
  result.ground_truth_csv = gt_csv.str();
  return result;
}

void WriteRunOutputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(dir / name, mode | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
  };
  {
    std::ofstream os = open("report.csv");
    metrics::WriteReportCsv(os, result.report);
  }
  {
    std::ofstream os = open("report.json");
    metrics::WriteReportJson(os, result.report);
  }
  {
    std::ofstream os = open("health.csv");
    WriteHealthLogHeader(os);
    WriteHealthLogRows(os, result.health);
  }
  {
    std::ofstream os = open("messages.bin", std::ios::out | std::ios::binary);
    os.write(reinterpret_cast<const char*>(result.messages.data()),
             static_cast<std::streamsize>(result.messages.size()));
  }
  {
    std::ofstream os = open("ground_truth.csv");
    os << result.ground_truth_csv;
  }
}

}  // namespace coop
