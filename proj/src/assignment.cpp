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
#include "tsbp/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tsbp/kernels.hpp"

namespace tsbp {

namespace {

// Hungarian method on an n x m row-major matrix with n <= m.
// Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const double* cost, std::size_t n, std::size_t m) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based; index 0 is the virtual root column/row.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const double* row = cost + (i0 - 1) * m;
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

void check_values(std::size_t rows, std::size_t cols, const std::vector<double>& values) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("cost matrix must be at least 1x1");
  if (values.size() != rows * cols) throw std::invalid_argument("cost matrix size mismatch");
  for (double x : values) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument("cost matrix entries must be finite and non-negative");
    }
  }
}

}  // namespace

CostMatrix CostMatrix::from_values(std::size_t rows, std::size_t cols, std::vector<double> values) {
  check_values(rows, cols, values);
  CostMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.cost = std::move(values);
  return m;
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.cost.resize(cost.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t.cost[j * rows + i] = at(i, j);
  }
  t.row_ids = col_ids;
  t.col_ids = row_ids;
  return t;
}

CostMatrix build_cost_matrix(std::span<const KeyedFeature> candidates,
                             std::span<const ClassedFeature> confirmed) {
  if (candidates.empty() || confirmed.empty()) {
    throw std::invalid_argument("build_cost_matrix: both sides must be nonempty");
  }
  const std::size_t dim = candidates[0].feature->dim();
  for (const auto& c : candidates) {
    if (c.feature->dim() != dim) throw std::invalid_argument("build_cost_matrix: dimension mismatch");
  }
  CostMatrix m;
  m.rows = candidates.size();
  m.cols = confirmed.size();
  // targets packed contiguously for the row kernel
  std::vector<double> targets;
  targets.reserve(m.cols * dim);
  for (const auto& q : confirmed) {
    if (q.feature->dim() != dim) throw std::invalid_argument("build_cost_matrix: dimension mismatch");
    targets.insert(targets.end(), q.feature->values.begin(), q.feature->values.end());
    m.col_ids.push_back(q.id);
    m.col_classes.push_back(q.cls);
  }
  m.cost.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* out = m.cost.data() + i * m.cols;
    kernels::squared_l2_rows(candidates[i].feature->view(), targets.data(), m.cols, out);
    for (std::size_t j = 0; j < m.cols; ++j) out[j] = std::sqrt(out[j]);
    m.row_ids.push_back(candidates[i].id);
  }
  return m;
}

MatchFlow solve_matching(const CostMatrix& costs) {
  check_values(costs.rows, costs.cols, costs.cost);
  MatchFlow flow;
  if (costs.rows <= costs.cols) {
    const auto cols = hungarian(costs.cost.data(), costs.rows, costs.cols);
    for (std::size_t i = 0; i < costs.rows; ++i) flow.pairs.emplace_back(i, cols[i]);
  } else {
    // more candidates than targets: solve the transpose, one row per target
    const CostMatrix t = costs.transposed();
    const auto rows = hungarian(t.cost.data(), t.rows, t.cols);
    for (std::size_t j = 0; j < t.rows; ++j) flow.pairs.emplace_back(rows[j], j);
    std::sort(flow.pairs.begin(), flow.pairs.end());
  }
  for (const auto& [i, j] : flow.pairs) flow.total_cost += costs.at(i, j);
  return flow;
}

std::optional<std::string> check_flow(const MatchFlow& flow, std::size_t rows, std::size_t cols) {
  if (flow.pairs.size() != std::min(rows, cols)) {
    return "flow has " + std::to_string(flow.pairs.size()) + " pairs, expected " +
           std::to_string(std::min(rows, cols));
  }
  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  for (const auto& [i, j] : flow.pairs) {
    if (i >= rows || j >= cols) return "pair index out of range";
    if (row_used[i]++) return "row " + std::to_string(i) + " matched twice";
    if (col_used[j]++) return "column " + std::to_string(j) + " matched twice";
  }
  return std::nullopt;
}

}  // namespace tsbp
