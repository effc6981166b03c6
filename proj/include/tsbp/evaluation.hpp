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
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsbp/core_model.hpp"
#include "tsbp/ingest_io.hpp"
#include "tsbp/propagation.hpp"

namespace tsbp {

double iou(const BoundingBox& a, const BoundingBox& b);

/// A detection with the label under evaluation.
struct Prediction {
  std::string image_id;
  BoxId box_id;
  BoundingBox box;
  ClassId cls;
  double confidence = 0.0;
};

/// Predictions labelled with each record's own class.
std::vector<Prediction> predictions_from(std::span<const DetectionRecord> records);

enum class Verdict {
  kTruePositive,
  kFalsePositive,  // overlaps no ground truth at the threshold
  kWrongClass,     // unmatched, but overlaps a ground truth of another class
};

const char* to_string(Verdict v);

struct BoxVerdict {
  BoxId box_id;
  Verdict verdict = Verdict::kFalsePositive;
  std::optional<std::size_t> gt_index;
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;  // includes wrong-class predictions
  std::size_t fn = 0;
};

struct MatchReport {
  Counts overall;
  std::map<ClassId, Counts> per_class;
  std::vector<BoxVerdict> verdicts;  // parallel to the predictions
};

/// Greedy one-to-one matching per image. Predictions are visited by
/// confidence descending, then box id ascending; each claims the unclaimed
/// same-class ground truth with the highest IoU >= iou_threshold (lowest
/// index on ties).
MatchReport match_to_ground_truth(std::span<const Prediction> preds,
                                  std::span<const GroundTruthBox> gts, double iou_threshold);

/// 2PR / (P + R); 0 when P + R = 0. Throws std::invalid_argument when all
/// counts are zero.
double f_score(std::size_t tp, std::size_t fp, std::size_t fn);

struct ErrorRate {
  std::size_t boxes = 0;
  std::size_t errors = 0;
  std::optional<double> percent;  // absent when there are no boxes
};

struct StageErrors {
  ErrorRate stage1;
  ErrorRate stage2;
  std::map<ClassId, ErrorRate> stage1_by_class;
  std::map<ClassId, ErrorRate> stage2_by_class;
};

/// Percentage of propagated boxes per stage whose verdict is a false
/// positive or wrong class. Boxes without a verdict are skipped.
StageErrors stage_error_rates(const PropagationAudit& audit, std::span<const BoxVerdict> verdicts);

/// Structured JSON metrics report; the stage section appears only when
/// stage errors are given.
std::string format_metrics_report(const MatchReport& report, const StageErrors* stages);

}  // namespace tsbp
