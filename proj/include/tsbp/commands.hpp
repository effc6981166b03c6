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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsbp/core_model.hpp"
#include "tsbp/evaluation.hpp"
#include "tsbp/propagation.hpp"
#include "tsbp/synthetic.hpp"

// Command implementations behind the tsbp executable. They throw
// DataError / ConfigError / DegenerateDataError; the executable maps those
// to exit codes.

namespace tsbp::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kConfigError = 3 };

struct RunOptions {
  std::filesystem::path detections;
  std::filesystem::path features;
  std::filesystem::path output;
  std::optional<std::filesystem::path> audit_out;
  RunConfig config;
  bool verbose = false;
};

/// Loads inputs, propagates, writes results (and the audit when asked).
PropagationResult cmd_run(const RunOptions& options, std::ostream& log);

struct EvalOptions {
  std::filesystem::path results;
  std::filesystem::path ground_truth;
  std::optional<std::filesystem::path> audit;
  std::optional<std::filesystem::path> output;
  double iou_threshold = 0.5;
};

/// Returns the JSON metrics report; prints a summary line to out.
std::string cmd_eval(const EvalOptions& options, std::ostream& out);

/// Scores refined labels against ground truth; predictions labelled with
/// the reject class are left out.
std::string evaluate_records(const std::vector<DetectionRecord>& refined,
                             const std::vector<GroundTruthBox>& gts, double iou_threshold,
                             const PropagationAudit* audit, MatchReport* report_out = nullptr);

enum class SweepParameter { kHfThreshold, kK };

struct SweepOptions {
  RunOptions base;  // output paths unused
  std::filesystem::path ground_truth;
  SweepParameter parameter = SweepParameter::kK;
  std::vector<double> values;
  std::optional<ClassId> sweep_class;  // hf_threshold only; default sweeps every class
};

struct SweepRow {
  double value = 0.0;
  Counts counts;
  double f_score = 0.0;
};

std::vector<SweepRow> cmd_sweep(const SweepOptions& options, std::ostream& out);

/// Applies a sweep value to a config: k, or the seed threshold of one class
/// (every class when cls is empty).
RunConfig with_sweep_value(RunConfig config, SweepParameter parameter, double value,
                           const std::optional<ClassId>& cls);

enum class BaselineMethod { kThreshold, kHistogramBinning, kPlatt, kBeta };

struct BaselineOptions {
  BaselineMethod method = BaselineMethod::kThreshold;
  std::filesystem::path detections;
  std::filesystem::path ground_truth;
  double split = 0.2;        // fraction of images used for fitting
  double threshold = 0.5;    // applied after calibration
  int bins = 10;
  double iou_threshold = 0.5;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> model_out;
};

/// Returns the JSON metrics report over the evaluation images.
std::string cmd_baseline(const BaselineOptions& options, std::ostream& out);

struct ImageSplit {
  std::vector<std::string> fit;
  std::vector<std::string> eval;
};

/// Shuffles image ids (first-appearance order) with SplitMix64(seed) by
/// Fisher-Yates and puts the first round(fraction * n) into the fit set.
ImageSplit split_images(const std::vector<std::string>& image_ids, double fraction,
                        std::uint64_t seed);

struct GenerateOptions {
  ClusterInstanceParams params;
  std::filesystem::path output_dir;
};

void cmd_generate(const GenerateOptions& options, std::ostream& out);

}  // namespace tsbp::cli
