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
#include <set>

#include "oracles/brute_force.hpp"
#include "tsbp/error.hpp"
#include "tsbp/propagation.hpp"
#include "tsbp/synthetic.hpp"

namespace tsbp {
namespace {

std::vector<const FeatureVector*> ptrs(const std::vector<FeatureVector>& v) {
  std::vector<const FeatureVector*> out;
  for (const auto& f : v) out.push_back(&f);
  return out;
}

// box 0.. are seeds listed in seed_classes, the rest are candidates
LabeledPool seeded_pool(const std::vector<ClassId>& seed_classes, std::size_t total) {
  LabeledPool pool;
  for (std::size_t b = 0; b < seed_classes.size(); ++b) {
    pool.confirmed[seed_classes[b]].push_back(ConfirmedEntry{b, Provenance::kSeed, 0});
    pool.representatives[seed_classes[b]].push_back(b);
  }
  for (std::size_t b = seed_classes.size(); b < total; ++b) pool.candidates.push_back(b);
  return pool;
}

TEST(PropagateRound, StageTwoForcesSingleMatch) {
  const std::vector<FeatureVector> f{{{0.0}}, {{100.0}}};
  LabeledPool pool = seeded_pool({"A"}, 2);
  ClassConstraints cons;
  cons.d_max["A"] = 0.0;
  const auto out = propagate_round(pool, ptrs(f), cons, 2, 1);
  ASSERT_EQ(out.accepted, 1u);
  EXPECT_TRUE(pool.candidates.empty());
  ASSERT_EQ(pool.confirmed["A"].size(), 2u);
  EXPECT_EQ(pool.confirmed["A"][1], (ConfirmedEntry{1, Provenance::kStage2, 1}));
  EXPECT_EQ(out.matches[0].representative, 0u);
  EXPECT_DOUBLE_EQ(out.matches[0].distance, 100.0);
}

TEST(PropagateRound, StageOneRejectsBeyondRadius) {
  const std::vector<FeatureVector> f{{{0.0}}, {{5.0}}};
  LabeledPool pool = seeded_pool({"A"}, 2);
  const LabeledPool before = pool;
  ClassConstraints cons;
  cons.d_max["A"] = 1.2;
  const auto out = propagate_round(pool, ptrs(f), cons, 1, 1);
  EXPECT_EQ(out.accepted, 0u);
  ASSERT_EQ(out.matches.size(), 1u);
  EXPECT_FALSE(out.matches[0].accepted);
  EXPECT_DOUBLE_EQ(out.matches[0].distance, 5.0);
  EXPECT_EQ(pool.candidates, before.candidates);
  EXPECT_EQ(pool.confirmed, before.confirmed);
  EXPECT_EQ(pool.representatives, before.representatives);
}

TEST(PropagateRound, StageOneRadiusIsStrict) {
  const std::vector<FeatureVector> f{{{0.0}}, {{2.0}}};
  LabeledPool pool = seeded_pool({"A"}, 2);
  ClassConstraints cons;
  cons.d_max["A"] = 2.0;
  EXPECT_EQ(propagate_round(pool, ptrs(f), cons, 1, 1).accepted, 0u);
}

TEST(PropagateRound, TwoByTwoSeparatedClasses) {
  const std::vector<FeatureVector> f{{{0.0}}, {{10.0}}, {{0.5}}, {{9.5}}};
  LabeledPool pool = seeded_pool({"A", "B"}, 4);
  ClassConstraints cons;
  cons.d_max["A"] = 2.0;
  cons.d_max["B"] = 2.0;

  const std::vector<double> cost{oracle::euclidean({0.5}, {0.0}), oracle::euclidean({0.5}, {10.0}),
                                 oracle::euclidean({9.5}, {0.0}), oracle::euclidean({9.5}, {10.0})};
  const double best = oracle::min_assignment_cost(cost, 2, 2);

  const auto out = propagate_round(pool, ptrs(f), cons, 1, 1);
  ASSERT_EQ(out.accepted, 2u);
  double total = 0.0;
  for (const auto& m : out.matches) total += m.distance;
  EXPECT_NEAR(total, best, 1e-12);
  EXPECT_TRUE(pool.candidates.empty());
  EXPECT_EQ(pool.confirmed["A"].back().box, 2u);
  EXPECT_EQ(pool.confirmed["B"].back().box, 3u);
  EXPECT_EQ(pool.representatives["A"], (std::vector<std::size_t>{0, 2}));
}

TEST(PropagateRound, PreconditionsChecked) {
  const std::vector<FeatureVector> f{{{0.0}}};
  LabeledPool pool = seeded_pool({"A"}, 1);
  EXPECT_THROW(propagate_round(pool, ptrs(f), {}, 1, 1), std::invalid_argument);
  LabeledPool p2 = seeded_pool({"A"}, 1);
  p2.candidates.push_back(0);
  EXPECT_THROW(propagate_round(p2, ptrs(f), {}, 3, 1), std::invalid_argument);
}

struct Instance {
  std::vector<DetectionRecord> records;
  FeatureStore features;
};

Instance make_instance(const std::vector<std::pair<double, std::pair<std::string, double>>>& pts) {
  Instance in;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string id = "b" + std::to_string(i);
    in.records.push_back(DetectionRecord{"img", id, BoundingBox{0, 0, 1, 1}, pts[i].second.first,
                                         pts[i].second.second, "f" + id});
    in.features.add("f" + id, FeatureVector{{pts[i].first}});
  }
  return in;
}

RunConfig config_with(double threshold) {
  RunConfig cfg;
  cfg.hf_thresholds.fallback = threshold;
  return cfg;
}

TEST(RunPropagation, AllSeedsMeansZeroRounds) {
  const auto in = make_instance({{0.0, {"A", 0.9}}, {1.0, {"A", 0.95}}, {5.0, {"B", 0.8}}});
  const auto r = run_propagation(in.records, in.features, config_with(0.5));
  EXPECT_TRUE(r.audit.rounds.empty());
  for (const auto& e : r.audit.entries) {
    EXPECT_EQ(e.provenance, Provenance::kSeed);
    EXPECT_EQ(e.round, 0);
    EXPECT_EQ(e.final_class, e.predicted_class);
  }
}

TEST(RunPropagation, NoSeedsIsConfigError) {
  const auto in = make_instance({{0.0, {"A", 0.1}}, {1.0, {"A", 0.2}}});
  EXPECT_THROW(run_propagation(in.records, in.features, config_with(0.5)), ConfigError);
}

TEST(RunPropagation, FewCandidatesZeroRadiusTakeOneStageTwoRound) {
  // a=3 candidates, m=4 representatives, every class has a single seed so d_max=0
  const auto in = make_instance({{0.0, {"A", 0.9}},
                                 {10.0, {"B", 0.9}},
                                 {20.0, {"C", 0.9}},
                                 {30.0, {"D", 0.9}},
                                 {1.0, {"A", 0.1}},
                                 {12.0, {"A", 0.1}},
                                 {29.0, {"B", 0.1}}});
  const auto r = run_propagation(in.records, in.features, config_with(0.5));
  ASSERT_EQ(r.audit.rounds.size(), 2u);
  EXPECT_EQ(r.audit.rounds[0].stage, 1);
  EXPECT_EQ(r.audit.rounds[0].accepted, 0u);
  EXPECT_EQ(r.audit.rounds[1].stage, 2);
  EXPECT_EQ(r.audit.rounds[1].accepted, 3u);
  EXPECT_TRUE(r.pool.candidates.empty());
  EXPECT_EQ(r.audit.entries[4].final_class, "A");
  EXPECT_EQ(r.audit.entries[5].final_class, "B");
  EXPECT_EQ(r.audit.entries[6].final_class, "D");
}

TEST(RunPropagation, RejectOptionAbsorbsLowScores) {
  const auto in = make_instance({{0.0, {"A", 0.9}},
                                 {0.5, {"A", 0.95}},
                                 {0.05, {"A", 0.4}},
                                 {0.3, {"A", 0.01}},
                                 {0.4, {"A", 0.02}}});
  RunConfig cfg = config_with(0.5);
  cfg.reject_class_threshold = 0.05;
  const auto r = run_propagation(in.records, in.features, cfg);
  EXPECT_EQ(r.audit.entries[3].final_class, kRejectClass);
  EXPECT_EQ(r.audit.entries[4].final_class, kRejectClass);
  EXPECT_EQ(r.audit.entries[3].provenance, Provenance::kSeed);
  EXPECT_EQ(r.audit.entries[2].final_class, "A");
}

TEST(RunPropagation, NormalizeOptionUsesDirections) {
  Instance in;
  auto add = [&](const std::string& id, const std::string& cls, double s, std::vector<double> x) {
    in.records.push_back(DetectionRecord{"img", id, BoundingBox{0, 0, 1, 1}, cls, s, "f" + id});
    in.features.add("f" + id, FeatureVector{std::move(x)});
  };
  add("a", "A", 0.9, {10.0, 0.0});
  add("b", "B", 0.9, {0.0, 1.0});
  // raw distance is closer to B, direction is closer to A
  add("c", "B", 0.1, {0.5, 0.1});
  RunConfig cfg = config_with(0.5);
  EXPECT_EQ(run_propagation(in.records, in.features, cfg).audit.entries[2].final_class, "B");
  cfg.feature_normalize = true;
  EXPECT_EQ(run_propagation(in.records, in.features, cfg).audit.entries[2].final_class, "A");
}

TEST(RunPropagation, InvalidInputIsDataError) {
  auto in = make_instance({{0.0, {"A", 0.9}}, {1.0, {"A", 0.2}}});
  in.records[1].feature_id = "missing";
  EXPECT_THROW(run_propagation(in.records, in.features, config_with(0.5)), DataError);
}

double max_diameter(const SyntheticInstance& inst, const std::vector<std::size_t>& seeds) {
  double d = 0.0;
  for (std::size_t i : seeds) {
    for (std::size_t j : seeds) {
      if (inst.records[i].class_label != inst.records[j].class_label) continue;
      d = std::max(d, oracle::euclidean(inst.features.at(inst.records[i].feature_id).values,
                                        inst.features.at(inst.records[j].feature_id).values));
    }
  }
  return d;
}

TEST(RunPropagation, WideMarginCandidatesFollowNearestSeed) {
  ClusterInstanceParams p;
  p.cluster_means = axis_means(2, 2, 10.0);
  p.cluster_stddev = 1.0;
  p.label_scramble_rate = 0.3;
  const auto inst = generate_cluster_instance(p);
  RunConfig cfg = config_with(p.hf_threshold);
  const auto r = run_propagation(inst.records, inst.features, cfg);

  std::vector<oracle::Seed> seeds;
  std::vector<std::size_t> seed_idx;
  for (std::size_t b = 0; b < inst.records.size(); ++b) {
    if (inst.records[b].confidence > p.hf_threshold) {
      seeds.push_back({inst.records[b].box_id, inst.records[b].class_label,
                       inst.features.at(inst.records[b].feature_id).values});
      seed_idx.push_back(b);
    }
  }
  const double diameter = max_diameter(inst, seed_idx);
  std::size_t checked = 0;
  for (std::size_t b = 0; b < inst.records.size(); ++b) {
    if (inst.records[b].confidence > p.hf_threshold) continue;
    const auto& x = inst.features.at(inst.records[b].feature_id).values;
    std::map<std::string, double> nearest_by_class;
    for (const auto& s : seeds) {
      const double d = oracle::euclidean(s.x, x);
      auto it = nearest_by_class.find(s.cls);
      if (it == nearest_by_class.end() || d < it->second) nearest_by_class[s.cls] = d;
    }
    std::vector<double> ds;
    for (const auto& [c, d] : nearest_by_class) ds.push_back(d);
    std::sort(ds.begin(), ds.end());
    if (ds.size() < 2 || ds[1] - ds[0] <= diameter) continue;
    ++checked;
    EXPECT_EQ(r.audit.entries[b].final_class, oracle::nearest_seed(seeds, x)) << inst.records[b].box_id;
  }
  EXPECT_GT(checked, 0u);
}

struct RandomCase {
  Instance in;
  RunConfig cfg;
};

RandomCase random_case(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> ud(0, 1);
  std::normal_distribution<double> nd;
  RandomCase rc;
  const int classes = 1 + static_cast<int>(gen() % 4);
  const std::size_t n = 2 + gen() % 120, d = 1 + gen() % 5;
  for (int c = 0; c < classes; ++c) rc.cfg.hf_thresholds.per_class["k" + std::to_string(c)] = 0.3 + 0.6 * ud(gen);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "b" + std::to_string(i);
    const int c = static_cast<int>(gen() % classes);
    std::vector<double> x(d);
    for (auto& v : x) v = nd(gen) * 2.0 + 4.0 * c;
    double s = ud(gen);
    if (i == 0) s = 0.99;
    rc.in.records.push_back(
        DetectionRecord{"img" + std::to_string(i % 3), id, BoundingBox{0, 0, 2, 2}, "k" + std::to_string(c), s, "f" + id});
    rc.in.features.add("f" + id, FeatureVector{x});
  }
  rc.cfg.k = 1 + static_cast<int>(gen() % 30);
  rc.cfg.rng_seed = gen();
  return rc;
}

TEST(RunPropagation, RandomInstanceInvariants) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rc = random_case(gen);
    const std::size_t n = rc.in.records.size();
    std::size_t initial_candidates = 0;
    int last_round = 0;
    bool seen_stage2 = false;
    std::size_t stage2_rounds = 0;
    const auto r = run_propagation(rc.in.records, rc.in.features, rc.cfg, [&](const LabeledPool& pool, const RoundLog& log) {
      ASSERT_EQ(check_partition(pool, n), std::nullopt);
      if (log.round == 1) initial_candidates = log.candidates;
      EXPECT_EQ(log.round, last_round + 1);
      last_round = log.round;
      if (log.stage == 2) {
        seen_stage2 = true;
        ++stage2_rounds;
        EXPECT_GT(log.accepted, 0u);
      } else {
        EXPECT_FALSE(seen_stage2);
      }
    });
    EXPECT_TRUE(r.pool.candidates.empty());
    EXPECT_EQ(r.pool.confirmed_count(), n);
    EXPECT_LE(stage2_rounds, initial_candidates);
    for (std::size_t b = 0; b < n; ++b) {
      const auto& e = r.audit.entries[b];
      EXPECT_FALSE(e.final_class.empty());
      if (e.provenance == Provenance::kStage1) {
        ASSERT_TRUE(e.distance.has_value());
        EXPECT_LT(*e.distance, r.constraints.radius(e.final_class));
      }
    }
    const auto again = run_propagation(rc.in.records, rc.in.features, rc.cfg);
    EXPECT_EQ(again.audit.entries, r.audit.entries);
    EXPECT_EQ(again.audit.rounds, r.audit.rounds);
  }
}

}  // namespace
}  // namespace tsbp
