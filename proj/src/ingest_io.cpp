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
#include "tsbp/ingest_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "tsbp/error.hpp"

namespace tsbp {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + byte, '\n');
    throw DataError(source + ":" + std::to_string(line) + ": parse error: " + e.what());
  }
}

const Json& member(const Json& obj, const char* key, const std::string& locus) {
  if (!obj.is_object()) throw DataError(locus + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(locus + ": missing key '" + key + "'");
  return *it;
}

double number(const Json& obj, const char* key, const std::string& locus) {
  const Json& v = member(obj, key, locus);
  if (!v.is_number()) throw DataError(locus + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::string text(const Json& obj, const char* key, const std::string& locus) {
  const Json& v = member(obj, key, locus);
  if (v.is_string()) return v.get<std::string>();
  // ids written as bare integers are accepted
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError(locus + ": '" + key + "' must be a string");
}

const Json& array(const Json& obj, const char* key, const std::string& locus) {
  const Json& v = member(obj, key, locus);
  if (!v.is_array()) throw DataError(locus + ": '" + key + "' must be an array");
  return v;
}

BoundingBox read_box(const Json& b, const std::string& locus) {
  return BoundingBox{number(b, "u", locus), number(b, "v", locus), number(b, "w", locus),
                     number(b, "h", locus)};
}

// Visits every box object as (image_id, box json, locus).
template <typename Fn>
void for_each_box(const Json& root, const std::string& source, Fn&& fn) {
  const Json& images = array(root, "images", source);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string image_locus = source + ": images[" + std::to_string(i) + "]";
    const std::string image_id = text(images[i], "image_id", image_locus);
    const Json& boxes = array(images[i], "boxes", image_locus);
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      fn(image_id, boxes[j], image_locus + ".boxes[" + std::to_string(j) + "]");
    }
  }
}

DetectionRecord read_detection(const std::string& image_id, const Json& b,
                               const std::string& locus) {
  DetectionRecord r;
  r.image_id = image_id;
  r.box_id = text(b, "box_id", locus);
  const std::string named = locus + " (box_id '" + r.box_id + "')";
  r.box = read_box(b, named);
  r.class_label = text(b, "class", named);
  r.confidence = number(b, "score", named);
  r.feature_id = text(b, "feature_id", named);
  if (!std::isfinite(r.confidence) || r.confidence < 0.0 || r.confidence > 1.0) {
    std::ostringstream msg;
    msg << named << ": score " << r.confidence << " outside [0, 1]";
    throw DataError(msg.str());
  }
  if (!r.box.valid()) {
    throw DataError(named + ": box must have finite coordinates and w > 0, h > 0");
  }
  return r;
}

// Images in order of first appearance, each with its member indices.
template <typename T, typename Key>
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_image(
    std::span<const T> items, Key key) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string& id = key(items[i]);
    auto [it, inserted] = slot.emplace(id, groups.size());
    if (inserted) groups.push_back({id, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

Json box_json(const BoundingBox& b) {
  Json j;
  j["u"] = b.u;
  j["v"] = b.v;
  j["w"] = b.w;
  j["h"] = b.h;
  return j;
}

Json detection_json(const DetectionRecord& r) {
  Json j;
  j["box_id"] = r.box_id;
  j.update(box_json(r.box));
  j["class"] = r.class_label;
  j["score"] = r.confidence;
  j["feature_id"] = r.feature_id;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void put_u32(std::string& out, std::uint32_t x) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((x >> s) & 0xFFu));
}

class ByteReader {
 public:
  ByteReader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t x = 0;
    for (int s = 0; s < 4; ++s) {
      x |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + s])) << (8 * s);
    }
    pos_ += 4;
    return x;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw DataError(source_ + ": truncated feature file while reading " + what + " at byte " +
                      std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_scalar(std::string_view s, const std::string& locus) {
  s = trim(s);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(locus + ": cannot parse '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<DetectionRecord> parse_detections(std::string_view text_in, const std::string& source) {
  const Json root = parse_json(text_in, source);
  std::vector<DetectionRecord> records;
  for_each_box(root, source, [&](const std::string& image_id, const Json& b, const std::string& l) {
    records.push_back(read_detection(image_id, b, l));
  });
  auto report = validate_detection_set(records, nullptr);
  if (!report.empty()) {
    throw DataError(source + ": invalid detection set:\n" + format_report(report));
  }
  return records;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
  return parse_detections(read_file(path), path.string());
}

std::string format_detections(std::span<const DetectionRecord> records) {
  Json images = Json::array();
  for (const auto& [image_id, members] :
       group_by_image(records, [](const DetectionRecord& r) -> const std::string& { return r.image_id; })) {
    Json boxes = Json::array();
    for (std::size_t i : members) boxes.push_back(detection_json(records[i]));
    images.push_back(Json{{"image_id", image_id}, {"boxes", std::move(boxes)}});
  }
  return dump(Json{{"images", std::move(images)}});
}

void write_detections(std::span<const DetectionRecord> records, const std::filesystem::path& path) {
  write_file(path, format_detections(records));
}

std::vector<GroundTruthBox> parse_ground_truth(std::string_view text_in, const std::string& source) {
  const Json root = parse_json(text_in, source);
  std::vector<GroundTruthBox> boxes;
  for_each_box(root, source, [&](const std::string& image_id, const Json& b, const std::string& l) {
    GroundTruthBox g;
    g.image_id = image_id;
    g.box = read_box(b, l);
    g.class_label = text(b, "class", l);
    if (!g.box.valid()) throw DataError(l + ": box must have finite coordinates and w > 0, h > 0");
    boxes.push_back(std::move(g));
  });
  return boxes;
}

std::vector<GroundTruthBox> load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(read_file(path), path.string());
}

std::string format_ground_truth(std::span<const GroundTruthBox> gts) {
  Json images = Json::array();
  for (const auto& [image_id, members] :
       group_by_image(gts, [](const GroundTruthBox& g) -> const std::string& { return g.image_id; })) {
    Json boxes = Json::array();
    for (std::size_t i : members) {
      Json b = box_json(gts[i].box);
      b["class"] = gts[i].class_label;
      boxes.push_back(std::move(b));
    }
    images.push_back(Json{{"image_id", image_id}, {"boxes", std::move(boxes)}});
  }
  return dump(Json{{"images", std::move(images)}});
}

void write_ground_truth(std::span<const GroundTruthBox> boxes, const std::filesystem::path& path) {
  write_file(path, format_ground_truth(boxes));
}

std::string encode_features_binary(const FeatureStore& store) {
  std::string out = "TSBF";
  out.push_back(static_cast<char>(kFeatureFormatVersion));
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  put_u32(out, static_cast<std::uint32_t>(store.dim()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& id = store.ids()[i];
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out += id;
    for (double x : store.vector_at(i).values) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  return out;
}

FeatureStore decode_features_binary(std::string_view bytes, const std::string& source) {
  ByteReader in(bytes, source);
  if (in.take(4, "magic") != "TSBF") throw DataError(source + ": missing TSBF magic");
  const auto version = static_cast<unsigned char>(in.take(1, "version")[0]);
  if (version != kFeatureFormatVersion) {
    throw DataError(source + ": unsupported feature file version " + std::to_string(version));
  }
  const std::uint32_t n = in.u32("count");
  const std::uint32_t d = in.u32("dimension");
  FeatureStore store(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = in.u32("id length");
    std::string id(in.take(len, "feature id"));
    FeatureVector vec;
    vec.values.resize(d);
    for (std::uint32_t k = 0; k < d; ++k) {
      const float x = in.f32("feature value");
      if (!std::isfinite(x)) {
        throw DataError(source + ": non-finite value in feature '" + id + "' at index " +
                        std::to_string(k));
      }
      vec.values[k] = x;
    }
    store.add(std::move(id), std::move(vec));
  }
  if (in.remaining() != 0) {
    throw DataError(source + ": " + std::to_string(in.remaining()) + " trailing bytes after " +
                    std::to_string(n) + " records");
  }
  return store;
}

FeatureStore parse_features_text(std::string_view body, const std::string& source) {
  std::vector<std::string_view> lines;
  for (auto line : split(body, '\n')) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError(source + ": empty feature file");
  const auto header = split(lines[0], ',');
  if (header.size() != 4 || trim(header[0]) != "tsbf-text") {
    throw DataError(source + ":1: expected header 'tsbf-text,<version>,<n>,<d>'");
  }
  const auto version = parse_scalar<unsigned>(header[1], source + ":1");
  if (version != kFeatureFormatVersion) {
    throw DataError(source + ": unsupported feature file version " + std::to_string(version));
  }
  const auto n = parse_scalar<std::size_t>(header[2], source + ":1");
  const auto d = parse_scalar<std::size_t>(header[3], source + ":1");
  if (lines.size() - 1 < n) {
    throw DataError(source + ": truncated feature file: header declares " + std::to_string(n) +
                    " rows, found " + std::to_string(lines.size() - 1));
  }
  if (lines.size() - 1 > n) {
    throw DataError(source + ": header declares " + std::to_string(n) + " rows, found " +
                    std::to_string(lines.size() - 1));
  }
  FeatureStore store(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string locus = source + ": row " + std::to_string(i + 1);
    const auto fields = split(lines[i + 1], ',');
    if (fields.size() != d + 1) {
      throw DataError(locus + ": expected " + std::to_string(d) + " values, found " +
                      std::to_string(fields.size() - 1));
    }
    FeatureVector vec;
    vec.values.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
      const auto raw = trim(fields[k + 1]);
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), x);
      if (ec != std::errc() || ptr != raw.data() + raw.size()) {
        throw DataError(locus + ": cannot parse value '" + std::string(raw) + "'");
      }
      if (!std::isfinite(x)) throw DataError(locus + ": non-finite value '" + std::string(raw) + "'");
      vec.values.push_back(x);
    }
    store.add(std::string(trim(fields[0])), std::move(vec));
  }
  return store;
}

std::string format_features_text(const FeatureStore& store) {
  std::ostringstream out;
  out << "tsbf-text," << static_cast<unsigned>(kFeatureFormatVersion) << "," << store.size() << ","
      << store.dim() << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << store.ids()[i];
    for (double x : store.vector_at(i).values) out << "," << x;
    out << "\n";
  }
  return out.str();
}

FeatureStore load_features(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.starts_with("TSBF")) return decode_features_binary(bytes, path.string());
  if (bytes.starts_with("tsbf-text")) return parse_features_text(bytes, path.string());
  throw DataError(path.string() + ": not a feature file (expected TSBF or tsbf-text header)");
}

void write_features(const FeatureStore& store, const std::filesystem::path& path) {
  write_file(path, encode_features_binary(store));
}

std::string format_results(std::span<const DetectionRecord> records, const LabeledPool& pool,
                           const PropagationAudit& audit) {
  if (!pool.candidates.empty()) {
    throw std::invalid_argument("write_results: pool still has " +
                                std::to_string(pool.candidates.size()) + " candidates");
  }
  if (audit.entries.size() != records.size()) {
    throw std::invalid_argument("write_results: audit does not cover every record");
  }
  Json images = Json::array();
  for (const auto& [image_id, members] :
       group_by_image(records, [](const DetectionRecord& r) -> const std::string& { return r.image_id; })) {
    Json boxes = Json::array();
    for (std::size_t i : members) {
      const AuditEntry& a = audit.entries[i];
      if (a.box_id != records[i].box_id) {
        throw std::invalid_argument("write_results: audit order differs from record order at '" +
                                    records[i].box_id + "'");
      }
      Json b = detection_json(records[i]);
      b["class"] = a.final_class;
      b["predicted_class"] = records[i].class_label;
      b["provenance"] = to_string(a.provenance);
      b["round"] = a.round;
      if (a.matched_seed) b["matched_seed"] = *a.matched_seed;
      if (a.distance) b["distance"] = *a.distance;
      boxes.push_back(std::move(b));
    }
    images.push_back(Json{{"image_id", image_id}, {"boxes", std::move(boxes)}});
  }
  return dump(Json{{"images", std::move(images)}});
}

void write_results(std::span<const DetectionRecord> records, const LabeledPool& pool,
                   const PropagationAudit& audit, const std::filesystem::path& path) {
  write_file(path, format_results(records, pool, audit));
}

std::vector<ResultRecord> parse_results(std::string_view text_in, const std::string& source) {
  const Json root = parse_json(text_in, source);
  std::vector<ResultRecord> results;
  for_each_box(root, source, [&](const std::string& image_id, const Json& b, const std::string& l) {
    ResultRecord r;
    r.detection = read_detection(image_id, b, l);
    r.audit.box_id = r.detection.box_id;
    r.audit.final_class = r.detection.class_label;
    r.audit.predicted_class = text(b, "predicted_class", l);
    r.detection.class_label = r.audit.predicted_class;
    r.audit.provenance = provenance_from_string(text(b, "provenance", l));
    r.audit.round = static_cast<int>(number(b, "round", l));
    if (b.contains("matched_seed")) r.audit.matched_seed = text(b, "matched_seed", l);
    if (b.contains("distance")) r.audit.distance = number(b, "distance", l);
    results.push_back(std::move(r));
  });
  return results;
}

std::vector<ResultRecord> load_results(const std::filesystem::path& path) {
  return parse_results(read_file(path), path.string());
}

LabeledPool pool_from_results(std::span<const ResultRecord> results) {
  LabeledPool pool;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const AuditEntry& a = results[i].audit;
    pool.confirmed[a.final_class].push_back(ConfirmedEntry{i, a.provenance, a.round});
  }
  return pool;
}

std::string format_audit(const PropagationAudit& audit) {
  Json rounds = Json::array();
  for (const auto& r : audit.rounds) {
    Json j;
    j["round"] = r.round;
    j["stage"] = r.stage;
    j["candidates"] = r.candidates;
    j["representatives"] = r.representatives;
    j["accepted"] = r.accepted;
    rounds.push_back(std::move(j));
  }
  Json entries = Json::array();
  for (const auto& a : audit.entries) {
    Json j;
    j["box_id"] = a.box_id;
    j["predicted_class"] = a.predicted_class;
    j["final_class"] = a.final_class;
    j["provenance"] = to_string(a.provenance);
    j["round"] = a.round;
    if (a.matched_seed) j["matched_seed"] = *a.matched_seed;
    if (a.distance) j["distance"] = *a.distance;
    entries.push_back(std::move(j));
  }
  return dump(Json{{"rounds", std::move(rounds)}, {"entries", std::move(entries)}});
}

void write_audit(const PropagationAudit& audit, const std::filesystem::path& path) {
  write_file(path, format_audit(audit));
}

PropagationAudit parse_audit(std::string_view text_in, const std::string& source) {
  const Json root = parse_json(text_in, source);
  PropagationAudit audit;
  const Json& rounds = array(root, "rounds", source);
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const std::string l = source + ": rounds[" + std::to_string(i) + "]";
    RoundLog r;
    r.round = static_cast<int>(number(rounds[i], "round", l));
    r.stage = static_cast<int>(number(rounds[i], "stage", l));
    r.candidates = static_cast<std::size_t>(number(rounds[i], "candidates", l));
    r.representatives = static_cast<std::size_t>(number(rounds[i], "representatives", l));
    r.accepted = static_cast<std::size_t>(number(rounds[i], "accepted", l));
    audit.rounds.push_back(r);
  }
  const Json& entries = array(root, "entries", source);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string l = source + ": entries[" + std::to_string(i) + "]";
    const Json& e = entries[i];
    AuditEntry a;
    a.box_id = text(e, "box_id", l);
    a.predicted_class = text(e, "predicted_class", l);
    a.final_class = text(e, "final_class", l);
    a.provenance = provenance_from_string(text(e, "provenance", l));
    a.round = static_cast<int>(number(e, "round", l));
    if (e.contains("matched_seed")) a.matched_seed = text(e, "matched_seed", l);
    if (e.contains("distance")) a.distance = number(e, "distance", l);
    audit.entries.push_back(std::move(a));
  }
  return audit;
}

PropagationAudit load_audit(const std::filesystem::path& path) {
  return parse_audit(read_file(path), path.string());
}

}  // namespace tsbp
