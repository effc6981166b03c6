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

#include <map>
#include <span>
#include <vector>

#include "tsbp/core_model.hpp"

namespace tsbp {

struct SeedSelection {
  std::map<ClassId, std::vector<std::size_t>> hf;  // record indices per class, input order
  std::vector<std::size_t> candidates;             // input order
};

/// A record is a high-confidence seed of its own class iff its confidence
/// strictly exceeds that class's threshold. Throws ConfigError when an
/// observed class has no threshold.
SeedSelection select_high_confidence(std::span<const DetectionRecord> records,
                                     const ThresholdMap& thresholds);

/// Mean over vectors of the distance to their nearest other vector.
/// Throws NotEnoughSeeds for fewer than two vectors and
/// std::invalid_argument on a dimension mismatch.
double compute_distance_constraint(std::span<const FeatureVector* const> features);

}  // namespace tsbp
