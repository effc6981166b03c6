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
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsbp/commands.hpp"
#include "tsbp/error.hpp"

namespace {

using tsbp::cli::ExitCode;

struct ConfigFlags {
  int k = 25;
  std::vector<std::string> hf_thresholds;
  std::optional<double> hf_default;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::optional<double> reject_below;
  double iou = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "K-means clusters per class (default 25)")->check(CLI::PositiveNumber);
    app->add_option("--hf-threshold", hf_thresholds,
                    "Seed threshold CLASS=VAL, repeatable; a box seeds its class when its score "
                    "is strictly above VAL");
    app->add_option("--hf-threshold-default", hf_default,
                    "Seed threshold for classes without --hf-threshold. Defaults to the first "
                    "--hf-threshold value, or 0.50 when none is given (artifact convention)")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "RNG seed for k-means++ (default 0)");
    app->add_flag("--normalize-features", normalize,
                  "L2-normalise features before distances (artifact convention, default off)");
    app->add_option("--reject-below", reject_below,
                    "Seed a synthetic reject class from boxes scoring below this value "
                    "(artifact convention, default off)")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--iou", iou, "IoU threshold for evaluation (artifact convention, default 0.5)");
  }

  tsbp::RunConfig build() const {
    tsbp::RunConfig c;
    c.k = k;
    c.rng_seed = seed;
    c.feature_normalize = normalize;
    c.reject_class_threshold = reject_below;
    c.iou_threshold = iou;
    std::optional<double> first;
    for (const auto& entry : hf_thresholds) {
      const auto eq = entry.rfind('=');
      if (eq == std::string::npos || eq == 0) {
        throw tsbp::ConfigError("--hf-threshold expects CLASS=VAL, got '" + entry + "'");
      }
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(entry.substr(eq + 1), &used);
        if (used != entry.size() - eq - 1) throw std::invalid_argument(entry);
      } catch (const std::exception&) {
        throw tsbp::ConfigError("--hf-threshold value is not a number in '" + entry + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) throw tsbp::ConfigError("--hf-threshold outside [0, 1]: " + entry);
      c.hf_thresholds.per_class[entry.substr(0, eq)] = v;
      if (!first) first = v;
    }
    c.hf_thresholds.fallback = hf_default ? *hf_default : (first ? *first : 0.5);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time self-guided bounding-box propagation for object detections"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  tsbp::cli::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Propagate labels from confident to uncertain boxes");
  run_cmd->add_option("--detections", run.detections, "Detection JSON")->required();
  run_cmd->add_option("--features", run.features, "Feature file (TSBF binary or tsbf-text)")->required();
  run_cmd->add_option("--output", run.output, "Results JSON")->required();
  run_cmd->add_option("--audit-out", run.audit_out, "Audit JSON (per-box provenance, per-round log)");
  run_cmd->add_flag("--verbose", run.verbose, "Print per-round progress to stderr");
  run_flags.attach(run_cmd);

  tsbp::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score results against ground truth");
  eval_cmd->add_option("--detections", eval.results, "Results or detection JSON")->required();
  eval_cmd->add_option("--ground-truth", eval.ground_truth, "Ground-truth JSON")->required();
  eval_cmd->add_option("--audit", eval.audit, "Audit JSON; adds per-stage error rates");
  eval_cmd->add_option("--output", eval.output, "Write the JSON metrics report here");
  eval_cmd->add_option("--iou", eval.iou_threshold, "IoU threshold (artifact convention, default 0.5)");

  ConfigFlags sweep_flags;
  tsbp::cli::SweepOptions sweep;
  std::string sweep_param;
  std::optional<std::string> sweep_class;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run and evaluate once per parameter value");
  sweep_cmd->add_option("--detections", sweep.base.detections, "Detection JSON")->required();
  sweep_cmd->add_option("--features", sweep.base.features, "Feature file")->required();
  sweep_cmd->add_option("--ground-truth", sweep.ground_truth, "Ground-truth JSON")->required();
  sweep_cmd->add_option("--param", sweep_param, "Parameter to vary")
      ->required()
      ->check(CLI::IsMember({"hf_threshold", "k"}));
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--sweep-class", sweep_class,
                        "Vary only this class's seed threshold (default: every class)");
  sweep_flags.attach(sweep_cmd);

  tsbp::cli::BaselineOptions baseline;
  std::string method;
  auto* base_cmd = app.add_subcommand("baseline", "Global threshold or calibrate-then-threshold baselines");
  base_cmd->add_option("--method", method, "threshold | hb | platt | beta")
      ->required()
      ->check(CLI::IsMember({"threshold", "hb", "platt", "beta"}));
  base_cmd->add_option("--detections", baseline.detections, "Detection JSON")->required();
  base_cmd->add_option("--ground-truth", baseline.ground_truth, "Ground-truth JSON")->required();
  base_cmd->add_option("--split", baseline.split,
                       "Fraction of images used to fit calibrators (default 0.2); the rest are scored");
  base_cmd->add_option("--threshold", baseline.threshold, "Score threshold after calibration (default 0.50)");
  base_cmd->add_option("--bins", baseline.bins, "Histogram bins (artifact convention, default 10)")
      ->check(CLI::PositiveNumber);
  base_cmd->add_option("--iou", baseline.iou_threshold, "IoU threshold (artifact convention, default 0.5)");
  base_cmd->add_option("--seed", baseline.seed, "Seed for the image split (default 0)");
  base_cmd->add_option("--output", baseline.output, "Write the JSON metrics report here");
  base_cmd->add_option("--model-out", baseline.model_out, "Write the fitted calibrator here");

  tsbp::cli::GenerateOptions gen;
  std::size_t dim = 8;
  double separation = 10.0;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic Gaussian-cluster instance");
  gen_cmd->add_option("--output", gen.output_dir, "Output directory")->required();
  gen_cmd->add_option("--classes", gen.params.num_classes, "Number of classes (default 2)");
  gen_cmd->add_option("--seeds-per-class", gen.params.seeds_per_class, "Seeds per class (default 20)");
  gen_cmd->add_option("--candidates-per-class", gen.params.candidates_per_class,
                      "Candidates per class (default 200)");
  gen_cmd->add_option("--dim", dim, "Feature dimension (default 8)");
  gen_cmd->add_option("--separation", separation, "Distance between neighbouring class means (default 10)");
  gen_cmd->add_option("--stddev", gen.params.cluster_stddev, "Cluster standard deviation (default 1)");
  gen_cmd->add_option("--seed-threshold", gen.params.hf_threshold,
                      "Confidence split between seeds and candidates (default 0.6)");
  gen_cmd->add_option("--scramble", gen.params.label_scramble_rate,
                      "Fraction of candidates with a wrong predicted label (default 0)");
  gen_cmd->add_option("--images", gen.params.num_images, "Number of images (default 10)");
  gen_cmd->add_option("--seed", gen.params.rng_seed, "Generator seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ExitCode::kOk : ExitCode::kUsage;
  }

  try {
    if (*run_cmd) {
      run.config = run_flags.build();
      tsbp::cli::cmd_run(run, std::cerr);
    } else if (*eval_cmd) {
      tsbp::cli::cmd_eval(eval, std::cout);
    } else if (*sweep_cmd) {
      sweep.base.config = sweep_flags.build();
      sweep.parameter =
          sweep_param == "k" ? tsbp::cli::SweepParameter::kK : tsbp::cli::SweepParameter::kHfThreshold;
      sweep.sweep_class = sweep_class;
      tsbp::cli::cmd_sweep(sweep, std::cout);
    } else if (*base_cmd) {
      using tsbp::cli::BaselineMethod;
      baseline.method = method == "threshold" ? BaselineMethod::kThreshold
                        : method == "hb"      ? BaselineMethod::kHistogramBinning
                        : method == "platt"   ? BaselineMethod::kPlatt
                                              : BaselineMethod::kBeta;
      tsbp::cli::cmd_baseline(baseline, std::cout);
    } else if (*gen_cmd) {
      gen.params.cluster_means = tsbp::axis_means(gen.params.num_classes, dim, separation);
      tsbp::cli::cmd_generate(gen, std::cout);
    }
  } catch (const tsbp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return ExitCode::kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return ExitCode::kConfigError;
  } catch (const tsbp::DegenerateDataError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return ExitCode::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode::kDataError;
  }
  return ExitCode::kOk;
}
