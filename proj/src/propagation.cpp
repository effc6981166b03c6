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
#include "tsbp/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include "tsbp/assignment.hpp"
#include "tsbp/error.hpp"
#include "tsbp/kmeans.hpp"
#include "tsbp/seeding.hpp"

namespace tsbp {

namespace {

FeatureVector l2_normalized(const FeatureVector& f) {
  double norm = 0.0;
  for (double x : f.values) norm += x * x;
  norm = std::sqrt(norm);
  FeatureVector out = f;
  if (norm > 0.0) {
    for (double& x : out.values) x /= norm;
  }
  return out;
}

}  // namespace

RoundOutcome propagate_round(LabeledPool& pool, std::span<const FeatureVector* const> features,
                             const ClassConstraints& constraints, int stage, int round) {
  if (stage != 1 && stage != 2) throw std::invalid_argument("stage must be 1 or 2");
  if (pool.candidates.empty()) throw std::invalid_argument("propagate_round: no candidates");
  if (pool.representative_count() == 0) {
    throw std::invalid_argument("propagate_round: no representatives");
  }

  std::vector<KeyedFeature> rows;
  rows.reserve(pool.candidates.size());
  for (std::size_t b : pool.candidates) rows.push_back(KeyedFeature{{}, features[b]});
  std::vector<ClassedFeature> cols;
  std::vector<std::size_t> col_box;
  for (const auto& [cls, reps] : pool.representatives) {
    for (std::size_t b : reps) {
      cols.push_back(ClassedFeature{{}, cls, features[b]});
      col_box.push_back(b);
    }
  }

  const CostMatrix costs = build_cost_matrix(rows, cols);
  const MatchFlow flow = solve_matching(costs);

  RoundOutcome outcome;
  std::vector<char> taken(pool.candidates.size(), 0);
  const Provenance provenance = stage == 1 ? Provenance::kStage1 : Provenance::kStage2;
  for (const auto& [i, j] : flow.pairs) {
    RoundMatch m;
    m.candidate = pool.candidates[i];
    m.representative = col_box[j];
    m.cls = costs.col_classes[j];
    m.distance = costs.at(i, j);
    m.accepted = stage == 2 || m.distance < constraints.radius(m.cls);
    if (m.accepted) {
      taken[i] = 1;
      ++outcome.accepted;
    }
    outcome.matches.push_back(std::move(m));
  }
  for (const RoundMatch& m : outcome.matches) {
    if (!m.accepted) continue;
    pool.confirmed[m.cls].push_back(ConfirmedEntry{m.candidate, provenance, round});
    pool.representatives[m.cls].push_back(m.candidate);
  }
  std::size_t keep = 0;
  for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
    if (!taken[i]) pool.candidates[keep++] = pool.candidates[i];
  }
  pool.candidates.resize(keep);
  return outcome;
}

PropagationResult run_propagation(std::span<const DetectionRecord> records,
                                  const FeatureStore& features, const RunConfig& config,
                                  const RoundObserver& observer) {
  if (config.k < 1) throw ConfigError("k must be positive");
  const auto report = validate_detection_set(records, &features);
  if (!report.empty()) throw DataError("invalid detection set:\n" + format_report(report));

  std::vector<FeatureVector> normalized;
  std::vector<const FeatureVector*> feats;
  feats.reserve(records.size());
  if (config.feature_normalize) {
    normalized.reserve(records.size());
    for (const auto& r : records) normalized.push_back(l2_normalized(features.at(r.feature_id)));
    for (const auto& f : normalized) feats.push_back(&f);
  } else {
    for (const auto& r : records) feats.push_back(&features.at(r.feature_id));
  }

  SeedSelection selection = select_high_confidence(records, config.hf_thresholds);
  if (config.reject_class_threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t b : selection.candidates) {
      if (records[b].confidence < *config.reject_class_threshold) {
        selection.hf[kRejectClass].push_back(b);
      } else {
        kept.push_back(b);
      }
    }
    selection.candidates = std::move(kept);
  }
  if (selection.hf.empty()) {
    throw ConfigError("no class has a high-confidence seed; nothing to propagate from");
  }

  PropagationResult result;
  LabeledPool& pool = result.pool;
  PropagationAudit& audit = result.audit;
  audit.entries.resize(records.size());
  for (std::size_t b = 0; b < records.size(); ++b) {
    audit.entries[b].box_id = records[b].box_id;
    audit.entries[b].predicted_class = records[b].class_label;
  }

  for (const auto& [cls, seeds] : selection.hf) {
    std::vector<const FeatureVector*> seed_feats;
    std::vector<KeyedFeature> keyed;
    for (std::size_t b : seeds) {
      seed_feats.push_back(feats[b]);
      keyed.push_back(KeyedFeature{records[b].box_id, feats[b]});
      pool.confirmed[cls].push_back(ConfirmedEntry{b, Provenance::kSeed, 0});
      audit.entries[b].final_class = cls;
    }
    result.constraints.d_max[cls] =
        seeds.size() >= 2 ? compute_distance_constraint(seed_feats) : 0.0;
    auto& reps = pool.representatives[cls];
    for (std::size_t pos : select_representatives(keyed, config.k, config.rng_seed)) {
      reps.push_back(seeds[pos]);
    }
  }
  result.initial_representatives = pool.representatives;
  pool.candidates = std::move(selection.candidates);

  int stage = 1;
  int round = 0;
  while (!pool.candidates.empty()) {
    RoundLog log;
    log.round = ++round;
    log.stage = stage;
    log.candidates = pool.candidates.size();
    log.representatives = pool.representative_count();
    const RoundOutcome outcome = propagate_round(pool, feats, result.constraints, stage, round);
    log.accepted = outcome.accepted;
    for (const RoundMatch& m : outcome.matches) {
      if (!m.accepted) continue;
      AuditEntry& e = audit.entries[m.candidate];
      e.final_class = m.cls;
      e.provenance = stage == 1 ? Provenance::kStage1 : Provenance::kStage2;
      e.round = round;
      e.matched_seed = records[m.representative].box_id;
      e.distance = m.distance;
    }
    audit.rounds.push_back(log);
    if (observer) observer(pool, log);
    if (stage == 1 && outcome.accepted == 0) stage = 2;
  }
  return result;
}

}  // namespace tsbp
