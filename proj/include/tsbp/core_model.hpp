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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tsbp {

using ClassId = std::string;
using BoxId = std::string;

/// Axis-aligned box in pixel coordinates; (u, v) is the top-left corner.
struct BoundingBox {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const;
  double area() const { return w * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct DetectionRecord {
  std::string image_id;
  BoxId box_id;
  BoundingBox box;
  ClassId class_label;
  double confidence = 0.0;
  std::string feature_id;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct FeatureVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  std::span<const double> view() const { return values; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// A box id paired with its feature; the feature is borrowed.
struct KeyedFeature {
  BoxId id;
  const FeatureVector* feature = nullptr;
};

/// Feature vectors keyed by feature_id, iterated in insertion order.
class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::size_t dim) : dim_(dim) {}

  /// Throws DataError on a duplicate id or a dimension mismatch.
  void add(std::string id, FeatureVector vec);

  const FeatureVector* find(const std::string& id) const;
  const FeatureVector& at(const std::string& id) const;

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const FeatureVector& vector_at(std::size_t i) const { return vectors_[i]; }

  friend bool operator==(const FeatureStore& a, const FeatureStore& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.vectors_ == b.vectors_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<FeatureVector> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Provenance { kSeed, kStage1, kStage2 };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct ConfirmedEntry {
  std::size_t box = 0;  // index into the detection list
  Provenance provenance = Provenance::kSeed;
  int round = 0;

  friend bool operator==(const ConfirmedEntry&, const ConfirmedEntry&) = default;
};

/// Partition of all boxes into per-class confirmed sets and the candidate
/// list, plus the per-class representative lists used as matching targets.
/// Boxes are referred to by their index in the detection list.
struct LabeledPool {
  std::map<ClassId, std::vector<ConfirmedEntry>> confirmed;
  std::vector<std::size_t> candidates;
  std::map<ClassId, std::vector<std::size_t>> representatives;

  std::size_t confirmed_count() const;
  std::size_t representative_count() const;
};

/// Empty when the pool partitions {0, ..., box_count - 1} and every
/// representative is confirmed in its class; otherwise a description of
/// the first violation found.
std::optional<std::string> check_partition(const LabeledPool& pool, std::size_t box_count);

/// Per-class feature-distance acceptance radius for stage-1 propagation.
struct ClassConstraints {
  std::map<ClassId, double> d_max;

  /// Missing classes have radius 0, which accepts nothing.
  double radius(const ClassId& c) const;
};

/// Per-class seed thresholds with an optional fallback for unlisted classes.
struct ThresholdMap {
  std::map<ClassId, double> per_class;
  std::optional<double> fallback;

  /// Throws ConfigError when the class has no threshold.
  double at(const ClassId& c) const;
};

inline constexpr const char* kRejectClass = "__reject__";

struct RunConfig {
  ThresholdMap hf_thresholds;
  int k = 25;
  std::uint64_t rng_seed = 0;
  bool feature_normalize = false;
  double iou_threshold = 0.5;
  std::optional<double> reject_class_threshold;
};

enum class ViolationKind {
  kDuplicateBoxId,
  kMissingFeature,
  kNonFiniteValue,
  kDimMismatch,
  kConfidenceRange,
  kInvalidBox,
};

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  BoxId box_id;
  std::string message;
};

/// Lists every violated record invariant. Pass a null store to skip the
/// feature checks.
std::vector<Violation> validate_detection_set(std::span<const DetectionRecord> records,
                                              const FeatureStore* features);

std::string format_report(std::span<const Violation> report);

}  // namespace tsbp
