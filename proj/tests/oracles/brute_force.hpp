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

// Independent reference computations for tests. Nothing here calls into the
// library's distance kernels or solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace tsbp::oracle {

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Minimum total cost over all injective maps of size min(rows, cols),
/// by exhaustive enumeration.
inline double min_assignment_cost(const std::vector<double>& cost, std::size_t rows,
                                  std::size_t cols) {
  const bool by_row = rows <= cols;
  const std::size_t n = by_row ? rows : cols;
  const std::size_t m = by_row ? cols : rows;
  auto at = [&](std::size_t i, std::size_t j) { return by_row ? cost[i * cols + j] : cost[j * cols + i]; };
  std::vector<char> used(m, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
    if (i == n) {
      best = std::min(best, acc);
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      rec(i + 1, acc + at(i, j));
      used[j] = 0;
    }
  };
  rec(0, 0.0);
  return best;
}

/// Mean nearest-other-neighbour distance.
inline double mean_nearest_neighbour(const std::vector<std::vector<double>>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) best = std::min(best, euclidean(pts[i], pts[j]));
    }
    total += best;
  }
  return total / static_cast<double>(pts.size());
}

struct TwoPartition {
  double inertia = std::numeric_limits<double>::infinity();
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Best split of 1-D points into two nonempty groups, over every subset.
inline TwoPartition best_two_partition(const std::vector<double>& xs) {
  TwoPartition best;
  const std::size_t n = xs.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double sa = 0, sb = 0;
    int na = 0, nb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) { sa += xs[i]; ++na; } else { sb += xs[i]; ++nb; }
    }
    const double ma = sa / na, mb = sb / nb;
    double in = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = (mask >> i & 1) ? ma : mb;
      in += (xs[i] - m) * (xs[i] - m);
    }
    if (in < best.inertia) best = {in, std::min(ma, mb), std::max(ma, mb)};
  }
  return best;
}

struct Seed {
  std::string id;
  std::string cls;
  std::vector<double> x;
};

/// Class of the nearest seed; ties to the smaller seed id.
inline std::string nearest_seed(const std::vector<Seed>& seeds, const std::vector<double>& x) {
  const Seed* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : seeds) {
    const double d = euclidean(s.x, x);
    if (d < best_d || (d == best_d && s.id < best->id)) {
      best_d = d;
      best = &s;
    }
  }
  return best->cls;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tsbp_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tsbp::oracle
