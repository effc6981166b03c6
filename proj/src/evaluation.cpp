// Copyright 2026 The TSBP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "tsbp/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace tsbp {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.u + a.w, b.u + b.w) - std::max(a.u, b.u);
  const double ih = std::min(a.v + a.h, b.v + b.h) - std::max(a.v, b.v);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<Prediction> predictions_from(std::span<const DetectionRecord> records) {
  std::vector<Prediction> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(Prediction{r.image_id, r.box_id, r.box, r.class_label, r.confidence});
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kTruePositive: return "tp";
    case Verdict::kFalsePositive: return "fp";
    case Verdict::kWrongClass: return "wrong_class";
  }
  return "?";
}

MatchReport match_to_ground_truth(std::span<const Prediction> preds,
                                  std::span<const GroundTruthBox> gts, double iou_threshold) {
  MatchReport report;
  report.verdicts.resize(preds.size());

  std::unordered_map<std::string, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) gts_by_image[gts[g].image_id].push_back(g);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (preds[x].confidence != preds[y].confidence) return preds[x].confidence > preds[y].confidence;
    return preds[x].box_id < preds[y].box_id;
  });

  std::vector<char> claimed(gts.size(), 0);
  static const std::vector<std::size_t> kNone;
  for (std::size_t p : order) {
    const Prediction& pred = preds[p];
    auto it = gts_by_image.find(pred.image_id);
    const auto& candidates = it == gts_by_image.end() ? kNone : it->second;
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    bool overlaps_other = false;
    for (std::size_t g : candidates) {
      const double o = iou(pred.box, gts[g].box);
      if (o < iou_threshold) continue;
      if (gts[g].class_label != pred.cls) {
        overlaps_other = true;
        continue;
      }
      if (!claimed[g] && o > best_iou) {
        best_iou = o;
        best = g;
      }
    }
    BoxVerdict& v = report.verdicts[p];
    v.box_id = pred.box_id;
    if (best) {
      claimed[*best] = 1;
      v.verdict = Verdict::kTruePositive;
      v.gt_index = best;
      ++report.overall.tp;
      ++report.per_class[pred.cls].tp;
    } else {
      v.verdict = overlaps_other ? Verdict::kWrongClass : Verdict::kFalsePositive;
      ++report.overall.fp;
      ++report.per_class[pred.cls].fp;
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (claimed[g]) continue;
    ++report.overall.fn;
    ++report.per_class[gts[g].class_label].fn;
  }
  return report;
}

double f_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp + fp + fn == 0) throw std::invalid_argument("f_score: all counts are zero");
  const double t = static_cast<double>(tp);
  const double precision = tp + fp == 0 ? 0.0 : t / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : t / static_cast<double>(tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

StageErrors stage_error_rates(const PropagationAudit& audit, std::span<const BoxVerdict> verdicts) {
  std::unordered_map<std::string, Verdict> by_box;
  for (const auto& v : verdicts) by_box.emplace(v.box_id, v.verdict);

  StageErrors out;
  // every known class gets a row, so an empty stage reads "no data"
  for (const auto& e : audit.entries) {
    out.stage1_by_class[e.final_class];
    out.stage2_by_class[e.final_class];
  }
  for (const auto& e : audit.entries) {
    if (e.provenance == Provenance::kSeed) continue;
    auto it = by_box.find(e.box_id);
    if (it == by_box.end()) continue;
    const bool error = it->second != Verdict::kTruePositive;
    const bool first = e.provenance == Provenance::kStage1;
    ErrorRate& total = first ? out.stage1 : out.stage2;
    ErrorRate& cls = (first ? out.stage1_by_class : out.stage2_by_class)[e.final_class];
    for (ErrorRate* r : {&total, &cls}) {
      ++r->boxes;
      if (error) ++r->errors;
    }
  }
  auto finish = [](ErrorRate& r) {
    if (r.boxes > 0) r.percent = 100.0 * static_cast<double>(r.errors) / static_cast<double>(r.boxes);
  };
  finish(out.stage1);
  finish(out.stage2);
  for (auto& [c, r] : out.stage1_by_class) finish(r);
  for (auto& [c, r] : out.stage2_by_class) finish(r);
  return out;
}

namespace {

using Json = nlohmann::ordered_json;

std::string percent_text(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

Json counts_json(const Counts& c) {
  Json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  const double t = static_cast<double>(c.tp);
  j["precision"] = c.tp + c.fp == 0 ? 0.0 : t / static_cast<double>(c.tp + c.fp);
  j["recall"] = c.tp + c.fn == 0 ? 0.0 : t / static_cast<double>(c.tp + c.fn);
  if (c.tp + c.fp + c.fn == 0) {
    j["f_score"] = nullptr;
    j["f_score_percent"] = "no data";
  } else {
    const double f = f_score(c.tp, c.fp, c.fn);
    j["f_score"] = f;
    j["f_score_percent"] = percent_text(f);
  }
  return j;
}

Json rate_json(const ErrorRate& r) {
  Json j;
  j["boxes"] = r.boxes;
  j["errors"] = r.errors;
  if (r.percent) {
    j["error_percent"] = *r.percent;
  } else {
    j["error_percent"] = "no data";
  }
  return j;
}

}  // namespace

std::string format_metrics_report(const MatchReport& report, const StageErrors* stages) {
  Json j;
  j["overall"] = counts_json(report.overall);
  Json per_class = Json::object();
  for (const auto& [c, counts] : report.per_class) per_class[c] = counts_json(counts);
  j["per_class"] = std::move(per_class);
  if (stages != nullptr) {
    Json s;
    s["stage1"] = rate_json(stages->stage1);
    s["stage2"] = rate_json(stages->stage2);
    Json by1 = Json::object(), by2 = Json::object();
    for (const auto& [c, r] : stages->stage1_by_class) by1[c] = rate_json(r);
    for (const auto& [c, r] : stages->stage2_by_class) by2[c] = rate_json(r);
    s["stage1_by_class"] = std::move(by1);
    s["stage2_by_class"] = std::move(by2);
    j["stage_errors"] = std::move(s);
  }
  return j.dump(2) + "\n";
}

}  // namespace tsbp
