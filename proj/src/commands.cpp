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
#include "tsbp/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <unordered_set>

#include "tsbp/calibration.hpp"
#include "tsbp/error.hpp"
#include "tsbp/ingest_io.hpp"
#include "tsbp/rng.hpp"

namespace tsbp::cli {

namespace {

std::vector<DetectionRecord> relabeled(std::span<const DetectionRecord> records,
                                       const PropagationAudit& audit) {
  std::vector<DetectionRecord> out(records.begin(), records.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].class_label = audit.entries[i].final_class;
  return out;
}

std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * f);
  return buf;
}

std::vector<std::string> image_order(std::span<const DetectionRecord> records,
                                     std::span<const GroundTruthBox> gts) {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.image_id).second) ids.push_back(r.image_id);
  }
  for (const auto& g : gts) {
    if (seen.insert(g.image_id).second) ids.push_back(g.image_id);
  }
  return ids;
}

template <typename T>
std::vector<T> in_images(std::span<const T> items, const std::vector<std::string>& images) {
  const std::unordered_set<std::string> keep(images.begin(), images.end());
  std::vector<T> out;
  for (const auto& x : items) {
    if (keep.count(x.image_id) != 0) out.push_back(x);
  }
  return out;
}

}  // namespace

PropagationResult cmd_run(const RunOptions& options, std::ostream& log) {
  const auto records = load_detections(options.detections);
  const auto features = load_features(options.features);
  RoundObserver observer;
  if (options.verbose) {
    observer = [&log](const LabeledPool&, const RoundLog& r) {
      log << "round " << r.round << " stage " << r.stage << " |P|=" << r.candidates
          << " |Q|=" << r.representatives << " accepted=" << r.accepted << "\n";
    };
  }
  PropagationResult result = run_propagation(records, features, options.config, observer);
  write_results(records, result.pool, result.audit, options.output);
  if (options.audit_out) write_audit(result.audit, *options.audit_out);
  if (options.verbose) {
    log << "wrote " << records.size() << " boxes to " << options.output.string() << " after "
        << result.audit.rounds.size() << " rounds\n";
  }
  return result;
}

std::string evaluate_records(const std::vector<DetectionRecord>& refined,
                             const std::vector<GroundTruthBox>& gts, double iou_threshold,
                             const PropagationAudit* audit, MatchReport* report_out) {
  std::vector<Prediction> preds;
  for (const auto& p : predictions_from(refined)) {
    if (p.cls != kRejectClass) preds.push_back(p);
  }
  MatchReport report = match_to_ground_truth(preds, gts, iou_threshold);
  std::string text;
  if (audit != nullptr) {
    const StageErrors stages = stage_error_rates(*audit, report.verdicts);
    text = format_metrics_report(report, &stages);
  } else {
    text = format_metrics_report(report, nullptr);
  }
  if (report_out != nullptr) *report_out = std::move(report);
  return text;
}

std::string cmd_eval(const EvalOptions& options, std::ostream& out) {
  if (!(options.iou_threshold > 0.0 && options.iou_threshold <= 1.0)) {
    throw ConfigError("--iou must lie in (0, 1]");
  }
  const auto refined = load_detections(options.results);
  const auto gts = load_ground_truth(options.ground_truth);
  std::optional<PropagationAudit> audit;
  if (options.audit) audit = load_audit(*options.audit);
  MatchReport report;
  const std::string text =
      evaluate_records(refined, gts, options.iou_threshold, audit ? &*audit : nullptr, &report);
  if (options.output) write_file(*options.output, text);
  const Counts& c = report.overall;
  out << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn;
  if (c.tp + c.fp + c.fn > 0) out << " F-score: " << percent(f_score(c.tp, c.fp, c.fn)) << "%";
  out << "\n";
  if (audit) {
    const StageErrors stages = stage_error_rates(*audit, report.verdicts);
    for (const auto& [name, rate] : {std::pair{"stage1", stages.stage1}, std::pair{"stage2", stages.stage2}}) {
      out << name << " error: ";
      if (rate.percent) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", *rate.percent);
        out << buf << " (" << rate.errors << "/" << rate.boxes << ")\n";
      } else {
        out << "no data\n";
      }
    }
  }
  return text;
}

RunConfig with_sweep_value(RunConfig config, SweepParameter parameter, double value,
                           const std::optional<ClassId>& cls) {
  if (parameter == SweepParameter::kK) {
    if (value < 1.0 || value != std::floor(value)) {
      throw ConfigError("k sweep values must be positive integers");
    }
    config.k = static_cast<int>(value);
    return config;
  }
  if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("threshold sweep values must lie in [0, 1]");
  if (cls) {
    config.hf_thresholds.per_class[*cls] = value;
  } else {
    for (auto& [c, t] : config.hf_thresholds.per_class) t = value;
    config.hf_thresholds.fallback = value;
  }
  return config;
}

std::vector<SweepRow> cmd_sweep(const SweepOptions& options, std::ostream& out) {
  if (options.values.empty()) throw ConfigError("sweep needs at least one value");
  const auto records = load_detections(options.base.detections);
  const auto features = load_features(options.base.features);
  const auto gts = load_ground_truth(options.ground_truth);
  std::vector<SweepRow> rows;
  out << (options.parameter == SweepParameter::kK ? "k" : "hf_threshold")
      << "\tF-score(%)\ttp\tfp\tfn\n";
  for (double v : options.values) {
    const RunConfig config =
        with_sweep_value(options.base.config, options.parameter, v, options.sweep_class);
    const PropagationResult result = run_propagation(records, features, config);
    MatchReport report;
    evaluate_records(relabeled(records, result.audit), gts, config.iou_threshold, nullptr, &report);
    SweepRow row;
    row.value = v;
    row.counts = report.overall;
    row.f_score = f_score(row.counts.tp, row.counts.fp, row.counts.fn);
    out << v << "\t" << percent(row.f_score) << "\t" << row.counts.tp << "\t" << row.counts.fp
        << "\t" << row.counts.fn << "\n";
    rows.push_back(row);
  }
  return rows;
}

ImageSplit split_images(const std::vector<std::string>& image_ids, double fraction,
                        std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("--split must lie in [0, 1]");
  std::vector<std::string> shuffled = image_ids;
  SplitMix64 rng(seed);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  }
  const auto fit = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(shuffled.size())));
  ImageSplit split;
  split.fit.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(fit));
  split.eval.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(fit), shuffled.end());
  return split;
}

std::string cmd_baseline(const BaselineOptions& options, std::ostream& out) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw ConfigError("--threshold must lie in [0, 1]");
  }
  const auto records = load_detections(options.detections);
  const auto gts = load_ground_truth(options.ground_truth);
  const ImageSplit split = split_images(image_order(records, gts), options.split, options.seed);
  const auto eval_records = in_images<DetectionRecord>(records, split.eval);
  const auto eval_gts = in_images<GroundTruthBox>(gts, split.eval);

  std::vector<DetectionRecord> kept;
  if (options.method == BaselineMethod::kThreshold) {
    kept = threshold_filter(eval_records, options.threshold);
  } else {
    if (split.fit.empty()) {
      throw ConfigError("calibrator baselines need a nonzero --split to fit on");
    }
    const auto fit_records = in_images<DetectionRecord>(records, split.fit);
    const auto fit_gts = in_images<GroundTruthBox>(gts, split.fit);
    const MatchReport fit_match =
        match_to_ground_truth(predictions_from(fit_records), fit_gts, options.iou_threshold);
    std::vector<double> scores;
    std::vector<bool> correct;
    for (std::size_t i = 0; i < fit_records.size(); ++i) {
      scores.push_back(fit_records[i].confidence);
      correct.push_back(fit_match.verdicts[i].verdict == Verdict::kTruePositive);
    }
    if (scores.empty()) throw ConfigError("fit split contains no detections");
    CalibratorModel model;
    switch (options.method) {
      case BaselineMethod::kHistogramBinning:
        model = fit_histogram_binning(scores, correct, options.bins);
        break;
      case BaselineMethod::kPlatt: model = fit_platt(scores, correct); break;
      case BaselineMethod::kBeta: model = fit_beta(scores, correct); break;
      case BaselineMethod::kThreshold: break;
    }
    if (options.model_out) write_file(*options.model_out, model.to_json());
    for (const auto& r : eval_records) {
      if (model.apply(r.confidence) > options.threshold) kept.push_back(r);
    }
  }
  MatchReport report;
  const std::string text = evaluate_records(kept, eval_gts, options.iou_threshold, nullptr, &report);
  if (options.output) write_file(*options.output, text);
  const Counts& c = report.overall;
  out << "fit images=" << split.fit.size() << " eval images=" << split.eval.size() << " tp=" << c.tp
      << " fp=" << c.fp << " fn=" << c.fn;
  if (c.tp + c.fp + c.fn > 0) out << " F-score: " << percent(f_score(c.tp, c.fp, c.fn)) << "%";
  out << "\n";
  return text;
}

void cmd_generate(const GenerateOptions& options, std::ostream& out) {
  const SyntheticInstance inst = generate_cluster_instance(options.params);
  write_instance(inst, options.output_dir);
  out << "wrote " << inst.records.size() << " boxes across " << options.params.num_images
      << " images to " << options.output_dir.string() << "\n";
}

}  // namespace tsbp::cli
