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
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles/brute_force.hpp"
#include "tsbp/error.hpp"
#include "tsbp/seeding.hpp"

namespace tsbp {
namespace {

DetectionRecord rec(const std::string& id, const std::string& cls, double s) {
  return DetectionRecord{"img", id, BoundingBox{0, 0, 1, 1}, cls, s, "f" + id};
}

std::vector<const FeatureVector*> ptrs(const std::vector<FeatureVector>& v) {
  std::vector<const FeatureVector*> out;
  for (const auto& f : v) out.push_back(&f);
  return out;
}

TEST(SelectHighConfidence, AboveThresholdIsSeed) {
  ThresholdMap t;
  t.per_class["c1"] = 0.70;
  const std::vector<DetectionRecord> recs{rec("a", "c1", 0.72)};
  const auto sel = select_high_confidence(recs, t);
  EXPECT_EQ(sel.hf.at("c1"), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(sel.candidates.empty());
}

TEST(SelectHighConfidence, EqualToThresholdIsCandidate) {
  ThresholdMap t;
  t.per_class["c1"] = 0.70;
  const std::vector<DetectionRecord> recs{rec("a", "c1", 0.70)};
  const auto sel = select_high_confidence(recs, t);
  EXPECT_TRUE(sel.hf.empty());
  EXPECT_EQ(sel.candidates, (std::vector<std::size_t>{0}));
}

TEST(SelectHighConfidence, EmptyInput) {
  const auto sel = select_high_confidence({}, ThresholdMap{});
  EXPECT_TRUE(sel.hf.empty());
  EXPECT_TRUE(sel.candidates.empty());
}

TEST(SelectHighConfidence, MissingThresholdIsConfigError) {
  ThresholdMap t;
  t.per_class["c1"] = 0.5;
  const std::vector<DetectionRecord> recs{rec("a", "c2", 0.9)};
  EXPECT_THROW(select_high_confidence(recs, t), ConfigError);
}

TEST(SelectHighConfidence, PartitionAndMonotonicityProperties) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ud(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DetectionRecord> recs;
    const int n = static_cast<int>(gen() % 40);
    for (int i = 0; i < n; ++i) recs.push_back(rec(std::to_string(i), "c" + std::to_string(gen() % 3), ud(gen)));
    ThresholdMap t;
    for (int c = 0; c < 3; ++c) t.per_class["c" + std::to_string(c)] = ud(gen);
    const auto sel = select_high_confidence(recs, t);
    std::size_t total = sel.candidates.size();
    for (const auto& [c, v] : sel.hf) total += v.size();
    ASSERT_EQ(total, recs.size());

    ThresholdMap raised = t;
    const std::string cls = "c" + std::to_string(gen() % 3);
    raised.per_class[cls] = std::min(1.0, t.per_class[cls] + ud(gen) * 0.5);
    const auto sel2 = select_high_confidence(recs, raised);
    const auto before = sel.hf.count(cls) ? sel.hf.at(cls) : std::vector<std::size_t>{};
    const auto after = sel2.hf.count(cls) ? sel2.hf.at(cls) : std::vector<std::size_t>{};
    for (std::size_t b : after) {
      ASSERT_TRUE(std::find(before.begin(), before.end(), b) != before.end());
    }
  }
}

TEST(DistanceConstraint, IdenticalPairIsZero) {
  const std::vector<FeatureVector> f{{{1.0, 2.0}}, {{1.0, 2.0}}};
  EXPECT_EQ(compute_distance_constraint(ptrs(f)), 0.0);
}

TEST(DistanceConstraint, OneDimensionalHandCase) {
  const std::vector<FeatureVector> f{{{0.0}}, {{1.0}}, {{3.0}}};
  const double expected = oracle::mean_nearest_neighbour({{0.0}, {1.0}, {3.0}});
  ASSERT_DOUBLE_EQ(expected, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(compute_distance_constraint(ptrs(f)), expected);
}

TEST(DistanceConstraint, SingleVectorNotEnoughSeeds) {
  const std::vector<FeatureVector> f{{{0.0}}};
  EXPECT_THROW(compute_distance_constraint(ptrs(f)), NotEnoughSeeds);
  EXPECT_THROW(compute_distance_constraint({}), NotEnoughSeeds);
}

TEST(DistanceConstraint, MatchesOracleAndIsPermutationInvariantAndScaleCovariant) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + gen() % 15, d = 1 + gen() % 9;
    std::vector<std::vector<double>> raw(n, std::vector<double>(d));
    for (auto& v : raw) {
      for (auto& x : v) x = nd(gen);
    }
    std::vector<FeatureVector> f;
    for (const auto& v : raw) f.push_back(FeatureVector{v});
    const double dm = compute_distance_constraint(ptrs(f));
    EXPECT_NEAR(dm, oracle::mean_nearest_neighbour(raw), 1e-12);

    auto shuffled = f;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_NEAR(compute_distance_constraint(ptrs(shuffled)), dm, 1e-12);

    for (double lambda : {2.0, 0.25, 3.7}) {
      auto scaled = f;
      for (auto& v : scaled) {
        for (auto& x : v.values) x *= lambda;
      }
      const double ds = compute_distance_constraint(ptrs(scaled));
      if (lambda == 2.0 || lambda == 0.25) {
        EXPECT_EQ(ds, lambda * dm);  // power-of-two scaling is exact
      } else {
        EXPECT_NEAR(ds, lambda * dm, 1e-12 * lambda * dm);
      }
    }
  }
}

}  // namespace
}  // namespace tsbp
