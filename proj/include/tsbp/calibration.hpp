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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsbp/core_model.hpp"

namespace tsbp {

/// Records whose confidence strictly exceeds t, order preserved.
std::vector<DetectionRecord> threshold_filter(std::span<const DetectionRecord> records, double t);

enum class CalibratorKind { kHistogramBinning, kPlatt, kBeta };

const char* to_string(CalibratorKind k);

/// Scores are clipped to [1e-6, 1 - 1e-6] before any log or logit.
inline constexpr double kScoreClip = 1e-6;

struct CalibratorModel {
  CalibratorKind kind = CalibratorKind::kPlatt;
  // histogram binning
  std::vector<double> edges;   // num_bins + 1, from 0 to 1
  std::vector<double> values;  // per-bin fraction correct
  // platt: sigmoid(a * logit(s) + b)
  // beta:  sigmoid(c + a * ln(s) - b * ln(1 - s))
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double apply(double score) const;

  std::string to_json() const;
  static CalibratorModel from_json(std::string_view text);
};

/// Equal-width bins over [0, 1]; an empty bin takes the value of the
/// nearest nonempty bin (the lower one on a tie).
CalibratorModel fit_histogram_binning(std::span<const double> scores,
                                      const std::vector<bool>& correct, int num_bins);

/// Logistic fit on logit(s) by damped Newton iterations with backtracking,
/// starting from a = 1, b = 0 and stopping when the negative log-likelihood
/// changes by less than 1e-8. Throws DegenerateDataError when every sample
/// has the same outcome.
CalibratorModel fit_platt(std::span<const double> scores, const std::vector<bool>& correct);

/// Beta calibration: logistic fit on (ln s, -ln(1 - s)) with a, b >= 0;
/// a coefficient that comes out negative is pinned to zero and the rest
/// refitted. Same optimiser and errors as fit_platt.
CalibratorModel fit_beta(std::span<const double> scores, const std::vector<bool>& correct);

}  // namespace tsbp
