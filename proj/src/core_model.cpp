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
#include "tsbp/core_model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tsbp/error.hpp"

namespace tsbp {

bool BoundingBox::valid() const {
  return std::isfinite(u) && std::isfinite(v) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

void FeatureStore::add(std::string id, FeatureVector vec) {
  if (ids_.empty() && dim_ == 0) dim_ = vec.dim();
  if (vec.dim() != dim_) {
    throw DataError("feature '" + id + "' has dimension " + std::to_string(vec.dim()) +
                    ", expected " + std::to_string(dim_));
  }
  if (index_.count(id) != 0) throw DataError("duplicate feature id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  vectors_.push_back(std::move(vec));
}

const FeatureVector* FeatureStore::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

const FeatureVector& FeatureStore::at(const std::string& id) const {
  const FeatureVector* f = find(id);
  if (f == nullptr) throw DataError("unknown feature id '" + id + "'");
  return *f;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kSeed: return "seed";
    case Provenance::kStage1: return "stage1";
    case Provenance::kStage2: return "stage2";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "seed") return Provenance::kSeed;
  if (s == "stage1") return Provenance::kStage1;
  if (s == "stage2") return Provenance::kStage2;
  throw DataError("unknown provenance '" + s + "'");
}

std::size_t LabeledPool::confirmed_count() const {
  std::size_t n = 0;
  for (const auto& [c, entries] : confirmed) n += entries.size();
  return n;
}

std::size_t LabeledPool::representative_count() const {
  std::size_t n = 0;
  for (const auto& [c, reps] : representatives) n += reps.size();
  return n;
}

std::optional<std::string> check_partition(const LabeledPool& pool, std::size_t box_count) {
  std::vector<int> seen(box_count, 0);
  auto mark = [&](std::size_t b) -> std::optional<std::string> {
    if (b >= box_count) return "box index " + std::to_string(b) + " out of range";
    if (seen[b]++ != 0) return "box index " + std::to_string(b) + " appears twice";
    return std::nullopt;
  };
  for (const auto& [c, entries] : pool.confirmed) {
    for (const auto& e : entries) {
      if (auto err = mark(e.box)) return err;
    }
  }
  for (std::size_t b : pool.candidates) {
    if (auto err = mark(b)) return err;
  }
  for (std::size_t b = 0; b < box_count; ++b) {
    if (seen[b] == 0) return "box index " + std::to_string(b) + " missing from pool";
  }
  for (const auto& [c, reps] : pool.representatives) {
    auto it = pool.confirmed.find(c);
    std::unordered_set<std::size_t> members;
    if (it != pool.confirmed.end()) {
      for (const auto& e : it->second) members.insert(e.box);
    }
    for (std::size_t r : reps) {
      if (members.count(r) == 0) {
        return "representative " + std::to_string(r) + " of class '" + c + "' is not confirmed";
      }
    }
  }
  return std::nullopt;
}

double ClassConstraints::radius(const ClassId& c) const {
  auto it = d_max.find(c);
  return it == d_max.end() ? 0.0 : it->second;
}

double ThresholdMap::at(const ClassId& c) const {
  auto it = per_class.find(c);
  if (it != per_class.end()) return it->second;
  if (fallback) return *fallback;
  throw ConfigError("no seed threshold for class '" + c + "'");
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kDuplicateBoxId: return "duplicate-box-id";
    case ViolationKind::kMissingFeature: return "missing-feature";
    case ViolationKind::kNonFiniteValue: return "non-finite-value";
    case ViolationKind::kDimMismatch: return "dim-mismatch";
    case ViolationKind::kConfidenceRange: return "confidence-range";
    case ViolationKind::kInvalidBox: return "invalid-box";
  }
  return "?";
}

std::vector<Violation> validate_detection_set(std::span<const DetectionRecord> records,
                                              const FeatureStore* features) {
  std::vector<Violation> report;
  std::unordered_set<std::string> ids;
  std::optional<std::size_t> dim;
  for (const auto& r : records) {
    if (!ids.insert(r.box_id).second) {
      report.push_back({ViolationKind::kDuplicateBoxId, r.box_id, "box_id appears more than once"});
    }
    if (!r.box.valid()) {
      report.push_back({ViolationKind::kInvalidBox, r.box_id,
                        "box must have finite coordinates and positive width and height"});
    }
    if (!std::isfinite(r.confidence)) {
      report.push_back({ViolationKind::kNonFiniteValue, r.box_id, "confidence is not finite"});
    } else if (r.confidence < 0.0 || r.confidence > 1.0) {
      std::ostringstream msg;
      msg << "confidence " << r.confidence << " outside [0, 1]";
      report.push_back({ViolationKind::kConfidenceRange, r.box_id, msg.str()});
    }
    if (features == nullptr) continue;
    const FeatureVector* f = features->find(r.feature_id);
    if (f == nullptr) {
      report.push_back({ViolationKind::kMissingFeature, r.box_id,
                        "feature_id '" + r.feature_id + "' has no vector"});
      continue;
    }
    if (!dim) dim = f->dim();
    if (f->dim() != *dim) {
      report.push_back({ViolationKind::kDimMismatch, r.box_id,
                        "feature dimension " + std::to_string(f->dim()) + " differs from " +
                            std::to_string(*dim)});
    }
    for (double x : f->values) {
      if (!std::isfinite(x)) {
        report.push_back({ViolationKind::kNonFiniteValue, r.box_id,
                          "feature '" + r.feature_id + "' has a non-finite value"});
        break;
      }
    }
  }
  return report;
}

std::string format_report(std::span<const Violation> report) {
  std::ostringstream out;
  for (const auto& v : report) {
    out << "  [" << to_string(v.kind) << "] box '" << v.box_id << "': " << v.message << "\n";
  }
  return out.str();
}

}  // namespace tsbp
