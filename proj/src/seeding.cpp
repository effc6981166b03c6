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
#include "tsbp/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tsbp/error.hpp"
#include "tsbp/kernels.hpp"

namespace tsbp {

SeedSelection select_high_confidence(std::span<const DetectionRecord> records,
                                     const ThresholdMap& thresholds) {
  SeedSelection out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DetectionRecord& r = records[i];
    if (r.confidence > thresholds.at(r.class_label)) {
      out.hf[r.class_label].push_back(i);
    } else {
      out.candidates.push_back(i);
    }
  }
  return out;
}

double compute_distance_constraint(std::span<const FeatureVector* const> features) {
  if (features.size() < 2) {
    throw NotEnoughSeeds("distance constraint needs at least 2 seeds, got " +
                         std::to_string(features.size()));
  }
  const std::size_t dim = features[0]->dim();
  for (const FeatureVector* f : features) {
    if (f->dim() != dim) throw std::invalid_argument("seed features differ in dimension");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (j == i) continue;
      best = std::min(best, kernels::squared_l2(features[i]->view(), features[j]->view()));
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(features.size());
}

}  // namespace tsbp
