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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tsbp/core_model.hpp"

namespace tsbp {

/// How and when one box received its final label.
struct AuditEntry {
  BoxId box_id;
  ClassId predicted_class;
  ClassId final_class;
  Provenance provenance = Provenance::kSeed;
  int round = 0;
  std::optional<BoxId> matched_seed;  // the Q member it was matched to
  std::optional<double> distance;

  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

struct RoundLog {
  int round = 0;
  int stage = 1;
  std::size_t candidates = 0;       // |P| before the round
  std::size_t representatives = 0;  // |Q| before the round
  std::size_t accepted = 0;

  friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

/// One entry per input box, in input order, plus the per-round log.
struct PropagationAudit {
  std::vector<AuditEntry> entries;
  std::vector<RoundLog> rounds;
};

/// One matched pair of a round, accepted or not.
struct RoundMatch {
  std::size_t candidate = 0;       // box index
  std::size_t representative = 0;  // box index
  ClassId cls;
  double distance = 0.0;
  bool accepted = false;
};

struct RoundOutcome {
  std::vector<RoundMatch> matches;
  std::size_t accepted = 0;
};

/// Runs one matching round: all candidates against all representatives
/// (joint instance over classes, ordered by class then list order).
/// Stage 1 accepts a matched pair iff its distance is strictly below the
/// representative class radius; stage 2 accepts every matched pair.
/// Accepted candidates are confirmed and appended to their class's
/// representatives. Requires at least one candidate and one representative.
RoundOutcome propagate_round(LabeledPool& pool, std::span<const FeatureVector* const> features,
                             const ClassConstraints& constraints, int stage, int round);

struct PropagationResult {
  LabeledPool pool;
  PropagationAudit audit;
  ClassConstraints constraints;
  std::map<ClassId, std::vector<std::size_t>> initial_representatives;
};

/// Called after every round with the updated pool and that round's log.
using RoundObserver = std::function<void(const LabeledPool&, const RoundLog&)>;

/// Seeding, representative selection, stage-1 rounds until a round accepts
/// nothing, then stage-2 rounds until no candidates remain. Throws
/// ConfigError when no class has a seed, DataError when a feature is
/// missing.
PropagationResult run_propagation(std::span<const DetectionRecord> records,
                                  const FeatureStore& features, const RunConfig& config,
                                  const RoundObserver& observer = {});

}  // namespace tsbp
