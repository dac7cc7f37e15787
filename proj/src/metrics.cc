// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <unordered_map>

namespace coop::metrics {
namespace {

std::vector<int> ClassIndices(std::span<const EvalPrediction> preds, ObjectClass cls) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].cls == cls) idx.push_back(static_cast<int>(i));
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return preds[a].score > preds[b].score; });
  return idx;
}

int CountGt(std::span<const EvalFrame> frames, ObjectClass cls) {
  int n = 0;
  for (const EvalFrame& f : frames) {
    for (const EvalGroundTruth& g : f.gts) n += g.cls == cls;
  }
  return n;
}

// Predictions of `cls` with score >= threshold.
std::vector<EvalPrediction> AtThreshold(const EvalFrame& f, ObjectClass cls, double threshold) {
  std::vector<EvalPrediction> out;
  for (const EvalPrediction& p : f.preds) {
    if (p.cls == cls && p.score >= threshold) out.push_back(p);
  }
  return out;
}

std::string Format(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

std::vector<std::pair<std::string_view, std::optional<double>>> Rows(const ClassMetrics& m) {
  return {{"ap50", m.ap50}, {"ar100", m.ar100}, {"amota", m.amota}, {"amotp", m.amotp}};
}

}  // namespace

FrameMatch MatchFrame(std::span<const EvalPrediction> preds, std::span<const EvalGroundTruth> gts,
                      ObjectClass cls, const MatchConfig& cfg) {
  FrameMatch m;
  std::vector<bool> taken(gts.size(), false);
  for (int pi : ClassIndices(preds, cls)) {
    const EvalPrediction& p = preds[pi];
    int best = -1;
    double best_score = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || gts[gi].cls != cls) continue;
      double score;
      if (cls == ObjectClass::kPedestrian) {
        const double d = (p.position - gts[gi].position).norm();
        if (d > cfg.pedestrian_distance_m) continue;
        score = -d;
      } else {
        score = BevIou(p.box, gts[gi].box);
        if (score < cfg.iou_threshold) continue;
      }
      if (best < 0 || score > best_score) {
        best = static_cast<int>(gi);
        best_score = score;
      }
    }
    if (best < 0) {
      ++m.fp;
      continue;
    }
    taken[best] = true;
    ++m.tp;
    m.pairs.emplace_back(pi, best);
    m.distances.push_back((p.position - gts[best].position).norm());
  }
  for (std::size_t gi = 0; gi < gts.size(); ++gi) {
    if (gts[gi].cls == cls && !taken[gi]) ++m.fn;
  }
  return m;
}

std::optional<double> Ap50(std::span<const EvalFrame> frames, ObjectClass cls, const MatchConfig& cfg) {
  const int num_gt = CountGt(frames, cls);
  if (num_gt == 0) return std::nullopt;

  // Greedy matching in score order makes each prefix of the ranking match
  // exactly as it would in isolation, so one pass labels every prediction.
  std::vector<std::pair<double, bool>> ranked;
  for (const EvalFrame& f : frames) {
    const FrameMatch m = MatchFrame(f.preds, f.gts, cls, cfg);
    std::vector<bool> is_tp(f.preds.size(), false);
    for (const auto& [pi, gi] : m.pairs) is_tp[pi] = true;
    for (std::size_t i = 0; i < f.preds.size(); ++i) {
      if (f.preds[i].cls == cls) ranked.emplace_back(f.preds[i].score, is_tp[i]);
    }
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<double> recall;
  std::vector<double> precision;
  int tp = 0;
  int fp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ranked[i].second ? ++tp : ++fp;
    // Equal scores form one threshold.
    if (i + 1 < ranked.size() && ranked[i + 1].first == ranked[i].first) continue;
    recall.push_back(static_cast<double>(tp) / num_gt);
    precision.push_back(static_cast<double>(tp) / (tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return 100.0 * ap;
}

std::optional<double> Ar100(std::span<const EvalFrame> frames, ObjectClass cls,
                            const MatchConfig& cfg, std::size_t max_per_frame) {
  const int num_gt = CountGt(frames, cls);
  if (num_gt == 0) return std::nullopt;
  int tp = 0;
  for (const EvalFrame& f : frames) {
    const std::vector<int> order = ClassIndices(f.preds, cls);
    std::vector<EvalPrediction> kept;
    for (std::size_t k = 0; k < order.size() && k < max_per_frame; ++k) kept.push_back(f.preds[order[k]]);
    tp += MatchFrame(kept, f.gts, cls, cfg).tp;
  }
  return 100.0 * tp / num_gt;
}

double Motar(int ids, int fp, int fn, double recall, int num_gt) {
  const double p = num_gt;
  const double v = 1.0 - (ids + fp + fn - (1.0 - recall) * p) / (recall * p);
  return std::clamp(v, 0.0, 1.0);
}

std::optional<TrackingScore> AmotaAmotp(std::span<const EvalFrame> frames, ObjectClass cls,
                                        int n_thresholds, const MatchConfig& cfg) {
  if (n_thresholds < 1) throw std::invalid_argument("n_thresholds must be >= 1");
  const int num_gt = CountGt(frames, cls);
  if (num_gt == 0) return std::nullopt;

  std::vector<double> scores;
  for (const EvalFrame& f : frames) {
    for (const EvalPrediction& p : f.preds) {
      if (p.cls == cls) scores.push_back(p.score);
    }
  }
  std::sort(scores.begin(), scores.end(), std::greater<>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  struct Point {
    int tp = 0, fp = 0, fn = 0, ids = 0;
    double dist_sum = 0.0;
  };
  // Operating points in descending threshold order; recall is non-decreasing
  // along this list because greedy matching is prefix-stable.
  std::vector<Point> points;
  for (double s : scores) {
    Point pt;
    std::unordered_map<std::uint32_t, std::uint32_t> last_track;
    for (const EvalFrame& f : frames) {
      const std::vector<EvalPrediction> preds = AtThreshold(f, cls, s);
      const FrameMatch m = MatchFrame(preds, f.gts, cls, cfg);
      pt.tp += m.tp;
      pt.fp += m.fp;
      pt.fn += m.fn;
      for (std::size_t k = 0; k < m.pairs.size(); ++k) {
        const std::uint32_t actor = f.gts[m.pairs[k].second].actor_id;
        const std::uint32_t track = preds[m.pairs[k].first].track_id;
        auto it = last_track.find(actor);
        if (it != last_track.end() && it->second != track) ++pt.ids;
        last_track[actor] = track;
        pt.dist_sum += m.distances[k];
      }
    }
    points.push_back(pt);
  }

  TrackingScore out;
  double motar_sum = 0.0;
  double motp_sum = 0.0;
  int achieved = 0;
  for (int k = 1; k <= n_thresholds; ++k) {
    const double r = static_cast<double>(k) / n_thresholds;
    const Point* chosen = nullptr;
    for (const Point& pt : points) {
      if (static_cast<double>(pt.tp) / num_gt >= r - 1e-12) {
        chosen = &pt;
        break;
      }
    }
    if (!chosen) continue;  // unreachable recall contributes zero
    motar_sum += Motar(chosen->ids, chosen->fp, chosen->fn, r, num_gt);
    motp_sum += chosen->tp > 0 ? chosen->dist_sum / chosen->tp : 0.0;
    ++achieved;
  }
  out.amota = motar_sum / n_thresholds;
  if (achieved > 0) out.amotp = motp_sum / achieved;
  return out;
}

std::string_view ToString(Pipeline p) {
  switch (p) {
    case Pipeline::kVehicle: return "vehicle";
    case Pipeline::kIntra: return "intra";
    case Pipeline::kInter: return "inter";
  }
  return "?";
}

std::optional<Pipeline> ParsePipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::kVehicle, Pipeline::kIntra, Pipeline::kInter}) {
    if (ToString(p) == name) return p;
  }
  return std::nullopt;
}

PipelineMetrics Evaluate(std::span<const EvalFrame> frames, const MatchConfig& cfg) {
  PipelineMetrics out;
  for (ObjectClass cls : kEvaluatedClasses) {
    ClassMetrics m;
    m.ap50 = Ap50(frames, cls, cfg);
    m.ar100 = Ar100(frames, cls, cfg);
    if (auto t = AmotaAmotp(frames, cls, 40, cfg)) {
      m.amota = t->amota;
      m.amotp = t->amotp;
    }
    out[cls] = m;
  }
  return out;
}

void WriteReportCsv(std::ostream& os, const EvalReport& report) {
  os << "pipeline,class,metric,value\n";
  for (const auto& [pipeline, per_class] : report) {
    for (const auto& [cls, m] : per_class) {
      for (const auto& [name, value] : Rows(m)) {
        os << ToString(pipeline) << ',' << ToString(cls) << ',' << name << ',' << Format(value) << '\n';
      }
    }
  }
}

void WriteReportJson(std::ostream& os, const EvalReport& report) {
  os << "{\n  \"schema\": [\"pipeline\", \"class\", \"metric\", \"value\"],\n  \"rows\": [";
  bool first = true;
  for (const auto& [pipeline, per_class] : report) {
    for (const auto& [cls, m] : per_class) {
      for (const auto& [name, value] : Rows(m)) {
        os << (first ? "\n" : ",\n");
        first = false;
        os << "    {\"pipeline\": \"" << ToString(pipeline) << "\", \"class\": \"" << ToString(cls)
           << "\", \"metric\": \"" << name << "\", \"value\": " << (value ? Format(value) : "null")
           << "}";
      }
    }
  }
  os << (first ? "]\n}\n" : "\n  ]\n}\n");
}

}  // namespace coop::metrics
