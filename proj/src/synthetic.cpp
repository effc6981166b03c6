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
#include "tsbp/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "tsbp/kernels.hpp"
#include "tsbp/rng.hpp"

namespace tsbp {

namespace {

std::string numbered(const char* prefix, std::size_t n, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

std::vector<std::vector<double>> axis_means(int num_classes, std::size_t dim, double separation) {
  if (dim == 0) throw std::invalid_argument("axis_means: dim must be positive");
  std::vector<std::vector<double>> means;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> m(dim, 0.0);
    m[0] = separation * c;
    means.push_back(std::move(m));
  }
  return means;
}

ClassId synthetic_class_name(int index) { return "c" + std::to_string(index + 1); }

SyntheticInstance generate_cluster_instance(const ClusterInstanceParams& p) {
  if (p.num_classes < 1) throw std::invalid_argument("need at least one class");
  if (static_cast<int>(p.cluster_means.size()) != p.num_classes) {
    throw std::invalid_argument("need one cluster mean per class");
  }
  if (!(p.cluster_stddev > 0.0)) throw std::invalid_argument("cluster_stddev must be positive");
  if (p.num_images < 1) throw std::invalid_argument("need at least one image");
  if (!(p.hf_threshold >= 0.05 && p.hf_threshold <= 0.95)) {
    throw std::invalid_argument("hf_threshold must lie in [0.05, 0.95]");
  }
  const std::size_t dim = p.cluster_means[0].size();
  for (std::size_t a = 0; a < p.cluster_means.size(); ++a) {
    if (p.cluster_means[a].size() != dim || dim == 0) {
      throw std::invalid_argument("cluster means must share a positive dimension");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (p.cluster_means[a] == p.cluster_means[b]) {
        throw std::invalid_argument("cluster means must be pairwise distinct");
      }
    }
  }

  SplitMix64 rng(p.rng_seed);
  SyntheticInstance inst;
  inst.features = FeatureStore(dim);
  constexpr double kGrid = 40.0;
  constexpr double kSide = 32.0;
  constexpr std::size_t kPerRow = 25;
  const auto images = static_cast<std::size_t>(p.num_images);

  std::size_t g = 0;
  auto emit = [&](int cls, bool seed) {
    FeatureVector f;
    f.values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double x = p.cluster_means[cls][k] + p.cluster_stddev * rng.normal();
      f.values[k] = static_cast<double>(static_cast<float>(x));
    }
    DetectionRecord r;
    r.class_label = synthetic_class_name(cls);
    if (seed) {
      r.confidence = rng.uniform(std::min(p.hf_threshold + 0.05, 1.0), 1.0);
    } else {
      r.confidence = rng.uniform(0.05, p.hf_threshold);
      if (rng.uniform() < p.label_scramble_rate && p.num_classes > 1) {
        const auto shift = 1 + rng.below(static_cast<std::uint64_t>(p.num_classes - 1));
        r.class_label = synthetic_class_name(static_cast<int>((cls + shift) % p.num_classes));
      }
    }
    const std::size_t slot = g / images;
    r.image_id = numbered("img", g % images, 3);
    r.box_id = numbered("b", g, 6);
    r.feature_id = numbered("f", g, 6);
    r.box = BoundingBox{static_cast<double>(slot % kPerRow) * kGrid,
                        static_cast<double>(slot / kPerRow) * kGrid, kSide, kSide};
    inst.features.add(r.feature_id, std::move(f));
    inst.ground_truth.push_back(GroundTruthBox{r.image_id, r.box, synthetic_class_name(cls)});
    inst.oracle_labels.push_back(synthetic_class_name(cls));
    inst.records.push_back(std::move(r));
    ++g;
  };

  for (int c = 0; c < p.num_classes; ++c) {
    for (int s = 0; s < p.seeds_per_class; ++s) emit(c, true);
    for (int s = 0; s < p.candidates_per_class; ++s) emit(c, false);
  }
  return inst;
}

void write_instance(const SyntheticInstance& instance, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_detections(instance.records, dir / "detections.json");
  write_features(instance.features, dir / "features.tsbf");
  write_ground_truth(instance.ground_truth, dir / "ground_truth.json");
}

std::vector<ClassId> nearest_seed_oracle(std::span<const ClassedFeature> seeds,
                                         std::span<const FeatureVector* const> candidates) {
  if (seeds.empty()) throw std::invalid_argument("nearest_seed_oracle: no seeds");
  std::vector<ClassId> labels;
  labels.reserve(candidates.size());
  for (const FeatureVector* f : candidates) {
    const ClassedFeature* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) {
      const double d = kernels::squared_l2(f->view(), s.feature->view());
      if (d < best_d || (d == best_d && s.id < best->id)) {
        best_d = d;
        best = &s;
      }
    }
    labels.push_back(best->cls);
  }
  return labels;
}

}  // namespace tsbp
