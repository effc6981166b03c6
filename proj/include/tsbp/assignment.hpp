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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsbp/core_model.hpp"

namespace tsbp {

/// A confirmed box used as a matching target.
struct ClassedFeature {
  BoxId id;
  ClassId cls;
  const FeatureVector* feature = nullptr;
};

/// Dense row-major matrix of candidate-to-target feature distances.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;
  std::vector<BoxId> row_ids;
  std::vector<BoxId> col_ids;
  std::vector<ClassId> col_classes;

  double at(std::size_t i, std::size_t j) const { return cost[i * cols + j]; }

  /// Anonymous matrix for solver use; throws std::invalid_argument unless
  /// rows, cols >= 1 and every entry is finite and non-negative.
  static CostMatrix from_values(std::size_t rows, std::size_t cols, std::vector<double> values);

  CostMatrix transposed() const;
};

/// cost[i][j] = Euclidean distance between candidate i and target j.
/// Throws std::invalid_argument on an empty side or mismatched dimensions.
CostMatrix build_cost_matrix(std::span<const KeyedFeature> candidates,
                             std::span<const ClassedFeature> confirmed);

struct MatchFlow {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending row
  double total_cost = 0.0;
};

/// Exact minimum-cost assignment of cardinality min(rows, cols): every row
/// and column used at most once. Shortest augmenting paths with dual
/// potentials, rows taken in ascending order and columns scanned in
/// ascending order, so equal-cost optima resolve deterministically.
MatchFlow solve_matching(const CostMatrix& costs);

/// Empty iff the flow is binary, uses each row and column at most once and
/// has exactly min(rows, cols) pairs.
std::optional<std::string> check_flow(const MatchFlow& flow, std::size_t rows, std::size_t cols);

}  // namespace tsbp
