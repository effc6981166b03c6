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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsbp/core_model.hpp"
#include "tsbp/propagation.hpp"

namespace tsbp {

struct GroundTruthBox {
  std::string image_id;
  BoundingBox box;
  ClassId class_label;

  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

// Detection and ground-truth files are JSON:
//   {"images": [{"image_id": ..., "boxes": [{"box_id", "u", "v", "w", "h",
//                                            "class", "score", "feature_id"}]}]}
// Ground truth omits score and feature_id. Records keep file order.

std::vector<DetectionRecord> parse_detections(std::string_view text,
                                              const std::string& source = "<memory>");
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
std::string format_detections(std::span<const DetectionRecord> records);
void write_detections(std::span<const DetectionRecord> records, const std::filesystem::path& path);

std::vector<GroundTruthBox> parse_ground_truth(std::string_view text,
                                               const std::string& source = "<memory>");
std::vector<GroundTruthBox> load_ground_truth(const std::filesystem::path& path);
std::string format_ground_truth(std::span<const GroundTruthBox> boxes);
void write_ground_truth(std::span<const GroundTruthBox> boxes, const std::filesystem::path& path);

// Binary feature container, all integers and floats little-endian:
//   "TSBF" | version u8 (=1) | n u32 | d u32 |
//   n x ( id_len u32 | id bytes | d x float32 )
// Values are narrowed to float32 on write and widened back on read.
// Text fallback:
//   tsbf-text,1,<n>,<d>
//   <feature_id>,<v1>,...,<vd>     (n lines)

inline constexpr unsigned char kFeatureFormatVersion = 1;

std::string encode_features_binary(const FeatureStore& store);
FeatureStore decode_features_binary(std::string_view bytes, const std::string& source = "<memory>");
FeatureStore parse_features_text(std::string_view text, const std::string& source = "<memory>");
std::string format_features_text(const FeatureStore& store);
/// Detects binary vs text by the leading magic.
FeatureStore load_features(const std::filesystem::path& path);
void write_features(const FeatureStore& store, const std::filesystem::path& path);

/// One output row: the input detection (with its original class) and its
/// audit entry (final class and provenance).
struct ResultRecord {
  DetectionRecord detection;
  AuditEntry audit;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

// Results use the detection layout with "class" set to the final label and
// the extra keys "predicted_class", "provenance", "round", and, for
// propagated boxes, "matched_seed" and "distance". A results file therefore
// loads as a detection file of refined predictions.

/// Throws std::invalid_argument if the pool still has candidates.
std::string format_results(std::span<const DetectionRecord> records, const LabeledPool& pool,
                           const PropagationAudit& audit);
void write_results(std::span<const DetectionRecord> records, const LabeledPool& pool,
                   const PropagationAudit& audit, const std::filesystem::path& path);
std::vector<ResultRecord> parse_results(std::string_view text,
                                        const std::string& source = "<memory>");
std::vector<ResultRecord> load_results(const std::filesystem::path& path);
/// Rebuilds the confirmed sets (candidates and representatives empty).
LabeledPool pool_from_results(std::span<const ResultRecord> results);

std::string format_audit(const PropagationAudit& audit);
void write_audit(const PropagationAudit& audit, const std::filesystem::path& path);
PropagationAudit parse_audit(std::string_view text, const std::string& source = "<memory>");
PropagationAudit load_audit(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tsbp
