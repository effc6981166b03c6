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
#include "tsbp/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "tsbp/error.hpp"

namespace tsbp {

namespace {

double clip(double s) { return std::clamp(s, kScoreClip, 1.0 - kScoreClip); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

constexpr std::size_t kMaxParams = 3;
using Vec = std::array<double, kMaxParams>;

struct Design {
  std::size_t params = 0;
  std::vector<Vec> rows;  // one feature row per sample
  const std::vector<bool>* labels = nullptr;
};

double nll(const Design& d, const Vec& w) {
  double total = 0.0;
  for (std::size_t n = 0; n < d.rows.size(); ++n) {
    double z = 0.0;
    for (std::size_t k = 0; k < d.params; ++k) z += w[k] * d.rows[n][k];
    // -[y log p + (1 - y) log(1 - p)] = softplus(z) - y z
    total += softplus(z) - ((*d.labels)[n] ? z : 0.0);
  }
  return total;
}

// Solves H x = g for the free coordinates (others left at zero).
Vec solve(std::array<Vec, kMaxParams> h, Vec g, const std::array<bool, kMaxParams>& free,
          std::size_t p) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < p; ++k) {
    if (free[k]) idx.push_back(k);
  }
  const std::size_t n = idx.size();
  std::array<std::array<double, kMaxParams + 1>, kMaxParams> m{};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) m[r][c] = h[idx[r]][idx[c]];
    m[r][n] = g[idx[r]];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    if (std::abs(m[col][col]) < 1e-300) m[col][col] = 1e-12;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  Vec x{};
  for (std::size_t r = 0; r < n; ++r) x[idx[r]] = m[r][n] / m[r][r];
  return x;
}

Vec newton(const Design& d, Vec w, const std::array<bool, kMaxParams>& free) {
  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-8;
  double f = nll(d, w);
  for (int it = 0; it < kMaxIter; ++it) {
    Vec g{};
    std::array<Vec, kMaxParams> h{};
    for (std::size_t n = 0; n < d.rows.size(); ++n) {
      const Vec& x = d.rows[n];
      double z = 0.0;
      for (std::size_t k = 0; k < d.params; ++k) z += w[k] * x[k];
      const double p = sigmoid(z);
      const double r = p - ((*d.labels)[n] ? 1.0 : 0.0);
      const double curv = p * (1.0 - p);
      for (std::size_t k = 0; k < d.params; ++k) {
        g[k] += r * x[k];
        for (std::size_t l = 0; l < d.params; ++l) h[k][l] += curv * x[k] * x[l];
      }
    }
    const Vec step = solve(h, g, free, d.params);
    double t = 1.0;
    Vec next{};
    double fn = f;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t k = 0; k < d.params; ++k) next[k] = w[k] - t * step[k];
      fn = nll(d, next);
      if (fn <= f) break;
      t *= 0.5;
    }
    if (!(fn <= f)) break;
    const double change = f - fn;
    w = next;
    f = fn;
    if (change < kTol) break;
  }
  return w;
}

// Bin of s given edges 0 = e0 < e1 < ... < en = 1; the last edge is inclusive.
std::size_t bin_index(const std::vector<double>& edges, double score) {
  const double s = std::clamp(score, 0.0, 1.0);
  auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, s);
  return static_cast<std::size_t>(it - (edges.begin() + 1));
}

void check_inputs(std::span<const double> scores, const std::vector<bool>& correct) {
  if (scores.size() != correct.size()) {
    throw std::invalid_argument("calibration: scores and labels differ in length");
  }
  if (scores.empty()) throw std::invalid_argument("calibration: no samples");
}

void check_outcomes(const std::vector<bool>& correct) {
  const auto positives = std::count(correct.begin(), correct.end(), true);
  if (positives == 0 || positives == static_cast<long>(correct.size())) {
    throw DegenerateDataError("calibration data has a single outcome (" +
                              std::to_string(positives) + " of " + std::to_string(correct.size()) +
                              " correct); the fit is unbounded");
  }
}

}  // namespace

std::vector<DetectionRecord> threshold_filter(std::span<const DetectionRecord> records, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  std::vector<DetectionRecord> kept;
  for (const auto& r : records) {
    if (r.confidence > t) kept.push_back(r);
  }
  return kept;
}

const char* to_string(CalibratorKind k) {
  switch (k) {
    case CalibratorKind::kHistogramBinning: return "histogram_binning";
    case CalibratorKind::kPlatt: return "platt";
    case CalibratorKind::kBeta: return "beta";
  }
  return "?";
}

double CalibratorModel::apply(double score) const {
  switch (kind) {
    case CalibratorKind::kHistogramBinning: {
      return values[std::min(bin_index(edges, score), values.size() - 1)];
    }
    case CalibratorKind::kPlatt: {
      const double s = clip(score);
      return sigmoid(a * std::log(s / (1.0 - s)) + b);
    }
    case CalibratorKind::kBeta: {
      const double s = clip(score);
      return sigmoid(c + a * std::log(s) - b * std::log1p(-s));
    }
  }
  return 0.0;
}

std::string CalibratorModel::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  switch (kind) {
    case CalibratorKind::kHistogramBinning:
      j["edges"] = edges;
      j["values"] = values;
      break;
    case CalibratorKind::kPlatt:
      j["a"] = a;
      j["b"] = b;
      break;
    case CalibratorKind::kBeta:
      j["a"] = a;
      j["b"] = b;
      j["c"] = c;
      break;
  }
  return j.dump() + "\n";
}

CalibratorModel CalibratorModel::from_json(std::string_view text) {
  CalibratorModel m;
  try {
    const auto j = nlohmann::json::parse(text.begin(), text.end());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "histogram_binning") {
      m.kind = CalibratorKind::kHistogramBinning;
      m.edges = j.at("edges").get<std::vector<double>>();
      m.values = j.at("values").get<std::vector<double>>();
      if (m.values.empty() || m.edges.size() != m.values.size() + 1) {
        throw DataError("histogram model needs num_bins + 1 edges");
      }
    } else if (kind == "platt") {
      m.kind = CalibratorKind::kPlatt;
      m.a = j.at("a").get<double>();
      m.b = j.at("b").get<double>();
    } else if (kind == "beta") {
      m.kind = CalibratorKind::kBeta;
      m.a = j.at("a").get<double>();
      m.b = j.at("b").get<double>();
      m.c = j.at("c").get<double>();
    } else {
      throw DataError("unknown calibrator kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed calibrator model: ") + e.what());
  }
  return m;
}

CalibratorModel fit_histogram_binning(std::span<const double> scores,
                                      const std::vector<bool>& correct, int num_bins) {
  check_inputs(scores, correct);
  if (num_bins < 1) throw std::invalid_argument("histogram binning needs at least one bin");
  const auto bins = static_cast<std::size_t>(num_bins);
  CalibratorModel m;
  m.kind = CalibratorKind::kHistogramBinning;
  for (std::size_t i = 0; i <= bins; ++i) {
    m.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  }
  std::vector<double> hits(bins, 0.0), counts(bins, 0.0);
  for (std::size_t n = 0; n < scores.size(); ++n) {
    const std::size_t bin = bin_index(m.edges, scores[n]);
    counts[bin] += 1.0;
    if (correct[n]) hits[bin] += 1.0;
  }
  m.values.assign(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    std::size_t src = i;
    if (counts[i] == 0.0) {
      for (std::size_t off = 1; off < bins; ++off) {
        if (i >= off && counts[i - off] > 0.0) {
          src = i - off;
          break;
        }
        if (i + off < bins && counts[i + off] > 0.0) {
          src = i + off;
          break;
        }
      }
    }
    m.values[i] = hits[src] / counts[src];
  }
  return m;
}

CalibratorModel fit_platt(std::span<const double> scores, const std::vector<bool>& correct) {
  check_inputs(scores, correct);
  check_outcomes(correct);
  Design d;
  d.params = 2;
  d.labels = &correct;
  for (double s : scores) {
    const double c = clip(s);
    d.rows.push_back(Vec{std::log(c / (1.0 - c)), 1.0, 0.0});
  }
  const Vec w = newton(d, Vec{1.0, 0.0, 0.0}, {true, true, false});
  CalibratorModel m;
  m.kind = CalibratorKind::kPlatt;
  m.a = w[0];
  m.b = w[1];
  return m;
}

CalibratorModel fit_beta(std::span<const double> scores, const std::vector<bool>& correct) {
  check_inputs(scores, correct);
  check_outcomes(correct);
  Design d;
  d.params = 3;
  d.labels = &correct;
  for (double s : scores) {
    const double c = clip(s);
    d.rows.push_back(Vec{std::log(c), -std::log1p(-c), 1.0});
  }
  std::array<bool, kMaxParams> free{true, true, true};
  Vec w{1.0, 1.0, 0.0};
  while (true) {
    Vec start = w;
    for (std::size_t k = 0; k < 2; ++k) {
      if (!free[k]) start[k] = 0.0;
    }
    w = newton(d, start, free);
    // pin the most negative shape coefficient and refit
    std::size_t worst = kMaxParams;
    for (std::size_t k = 0; k < 2; ++k) {
      if (free[k] && w[k] < 0.0 && (worst == kMaxParams || w[k] < w[worst])) worst = k;
    }
    if (worst == kMaxParams) break;
    free[worst] = false;
    w[worst] = 0.0;
  }
  CalibratorModel m;
  m.kind = CalibratorKind::kBeta;
  m.a = w[0];
  m.b = w[1];
  m.c = w[2];
  return m;
}

}  // namespace tsbp
