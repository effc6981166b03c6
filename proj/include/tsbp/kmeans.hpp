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
#include <functional>
#include <span>
#include <vector>

#include "tsbp/core_model.hpp"

namespace tsbp {

struct ClusteringResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;  // cluster index per input point
  double inertia = 0.0;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // total squared centroid shift
  std::function<void(int iteration, double inertia)> on_iteration;
};

/// Lloyd's algorithm with k-means++ seeding from SplitMix64(rng_seed).
/// Uses min(k, n) clusters; empty clusters are refilled with the point
/// farthest from its centroid, so every returned cluster is nonempty.
ClusteringResult kmeans_fit(std::span<const KeyedFeature> points, int k, std::uint64_t rng_seed,
                            const KMeansOptions& options = {});

/// Positions (into points) of the representative boxes: every point when
/// there are at most k, otherwise the medoid of each cluster in cluster
/// order, ties to the smaller box id.
std::vector<std::size_t> select_representatives(std::span<const KeyedFeature> points, int k,
                                                std::uint64_t rng_seed);

}  // namespace tsbp
