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

#include <cstdint>

namespace tsbp {

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen because the algorithm is a
/// few lines of integer arithmetic, so fixtures can be regenerated bit for
/// bit from any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits: (next() >> 11) * 2^-53.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n); n > 0. Uses floor(uniform() * n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller, one value per call:
  /// u1 = 1 - uniform(), u2 = uniform(), z = sqrt(-2 ln u1) cos(2 pi u2).
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace tsbp
