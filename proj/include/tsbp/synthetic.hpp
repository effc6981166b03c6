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
#include <span>
#include <vector>

#include "tsbp/assignment.hpp"
#include "tsbp/core_model.hpp"
#include "tsbp/ingest_io.hpp"

namespace tsbp {

struct ClusterInstanceParams {
  int num_classes = 2;
  int seeds_per_class = 20;
  int candidates_per_class = 200;
  std::vector<std::vector<double>> cluster_means;  // one per class, equal dims
  double cluster_stddev = 1.0;
  double hf_threshold = 0.6;  // seeds score above it, candidates at or below
  double label_scramble_rate = 0.0;
  int num_images = 10;
  std::uint64_t rng_seed = 7;
};

/// Class c (0-based) centred at (c * separation, 0, ..., 0).
std::vector<std::vector<double>> axis_means(int num_classes, std::size_t dim, double separation);

/// Class name for a 0-based class index: "c1", "c2", ...
ClassId synthetic_class_name(int index);

struct SyntheticInstance {
  std::vector<DetectionRecord> records;
  FeatureStore features;
  std::vector<GroundTruthBox> ground_truth;
  std::vector<ClassId> oracle_labels;  // generating class per record
};

/// Draws from SplitMix64(rng_seed) in a fixed order: classes ascending;
/// within a class the seeds, then the candidates; per box the feature
/// dimensions in order (one normal each, value rounded to float32), then
/// the confidence, then for candidates the scramble draw and, when
/// scrambled, the replacement class. Seed confidences are uniform on
/// [hf_threshold + 0.05, 1), candidate confidences on [0.05, hf_threshold).
/// Box g lives in image g mod num_images on a fixed grid, and its ground
/// truth is the same box labelled with the generating class.
SyntheticInstance generate_cluster_instance(const ClusterInstanceParams& params);

/// Writes detections.json, features.tsbf and ground_truth.json into dir.
void write_instance(const SyntheticInstance& instance, const std::filesystem::path& dir);

/// Class of the Euclidean-nearest seed for each candidate; ties go to the
/// smaller seed box id. Requires at least one seed.
std::vector<ClassId> nearest_seed_oracle(std::span<const ClassedFeature> seeds,
                                         std::span<const FeatureVector* const> candidates);

}  // namespace tsbp
