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
#include "tsbp/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tsbp/kernels.hpp"
#include "tsbp/rng.hpp"

namespace tsbp {

namespace {

std::span<const double> values(const KeyedFeature& p) { return p.feature->view(); }

std::vector<std::size_t> kmeanspp_seeds(std::span<const KeyedFeature> points, std::size_t k,
                                        SplitMix64& rng) {
  const std::size_t n = points.size();
  std::vector<std::size_t> chosen;
  std::vector<char> taken(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto add = [&](std::size_t i) {
    chosen.push_back(i);
    taken[i] = 1;
    for (std::size_t p = 0; p < n; ++p) {
      d2[p] = std::min(d2[p], kernels::squared_l2(values(points[p]), values(points[i])));
    }
  };

  add(rng.below(n));
  while (chosen.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        if (d2[p] <= 0.0) continue;
        cum += d2[p];
        pick = p;
        if (cum > r) break;
      }
    } else {
      // every point coincides with a chosen centre
      for (std::size_t p = 0; p < n && pick == n; ++p) {
        if (!taken[p]) pick = p;
      }
    }
    add(pick);
  }
  return chosen;
}

}  // namespace

ClusteringResult kmeans_fit(std::span<const KeyedFeature> points, int k, std::uint64_t rng_seed,
                            const KMeansOptions& options) {
  if (points.empty()) throw std::invalid_argument("kmeans_fit: no points");
  if (k < 1) throw std::invalid_argument("kmeans_fit: k must be positive");
  const std::size_t n = points.size();
  const std::size_t dim = points[0].feature->dim();
  const std::size_t clusters = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  SplitMix64 rng(rng_seed);
  ClusteringResult result;
  for (std::size_t i : kmeanspp_seeds(points, clusters, rng)) {
    result.centroids.emplace_back(values(points[i]).begin(), values(points[i]).end());
  }
  result.assignment.assign(n, 0);
  std::vector<double> cost(n, 0.0);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (std::size_t p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < clusters; ++c) {
        const double d = kernels::squared_l2(values(points[p]), result.centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      result.assignment[p] = arg;
      cost[p] = best;
    }

    std::vector<std::size_t> count(clusters, 0);
    for (std::size_t a : result.assignment) ++count[a];
    for (std::size_t e = 0; e < clusters; ++e) {
      if (count[e] != 0) continue;
      std::size_t far = n;
      for (std::size_t p = 0; p < n; ++p) {
        if (count[result.assignment[p]] > 1 && (far == n || cost[p] > cost[far])) far = p;
      }
      --count[result.assignment[far]];
      result.assignment[far] = e;
      count[e] = 1;
      cost[far] = 0.0;
      result.centroids[e].assign(values(points[far]).begin(), values(points[far]).end());
    }

    std::vector<std::vector<double>> next(clusters, std::vector<double>(dim, 0.0));
    for (std::size_t p = 0; p < n; ++p) {
      auto& acc = next[result.assignment[p]];
      const auto x = values(points[p]);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += x[j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < clusters; ++c) {
      for (double& x : next[c]) x /= static_cast<double>(count[c]);
      shift += kernels::squared_l2(next[c], result.centroids[c]);
    }
    result.centroids = std::move(next);

    result.inertia = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      result.inertia += kernels::squared_l2(values(points[p]), result.centroids[result.assignment[p]]);
    }
    result.iterations = iter;
    if (options.on_iteration) options.on_iteration(iter, result.inertia);
    if (shift < options.tolerance) break;
  }
  return result;
}

std::vector<std::size_t> select_representatives(std::span<const KeyedFeature> points, int k,
                                                std::uint64_t rng_seed) {
  if (points.empty()) throw std::invalid_argument("select_representatives: no points");
  if (k < 1) throw std::invalid_argument("select_representatives: k must be positive");
  std::vector<std::size_t> reps;
  if (points.size() <= static_cast<std::size_t>(k)) {
    reps.resize(points.size());
    std::iota(reps.begin(), reps.end(), 0);
    return reps;
  }
  const ClusteringResult fit = kmeans_fit(points, k, rng_seed);
  const std::size_t clusters = fit.centroids.size();
  std::vector<std::size_t> medoid(clusters, points.size());
  std::vector<double> best(clusters, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::size_t c = fit.assignment[p];
    const double d = kernels::squared_l2(values(points[p]), fit.centroids[c]);
    if (d < best[c] || (d == best[c] && points[p].id < points[medoid[c]].id)) {
      best[c] = d;
      medoid[c] = p;
    }
  }
  for (std::size_t m : medoid) {
    if (m != points.size()) reps.push_back(m);
  }
  return reps;
}

}  // namespace tsbp
