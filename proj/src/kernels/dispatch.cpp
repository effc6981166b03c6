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
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tsbp/kernels.hpp"

namespace tsbp::kernels {

namespace {

using DistanceFn = double (*)(const double*, const double*, std::size_t);

DistanceFn function_for(Backend b) {
  switch (b) {
#if defined(TSBP_HAVE_AVX2)
    case Backend::kAvx2: return &squared_l2_avx2;
#endif
#if defined(TSBP_HAVE_NEON)
    case Backend::kNeon: return &squared_l2_neon;
#endif
    default: return &squared_l2_scalar;
  }
}

Backend detect() {
  if (const char* forced = std::getenv("TSBP_KERNEL")) {
    const std::string_view name(forced);
    for (Backend b : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
      if (name == backend_name(b) && backend_supported(b)) return b;
    }
  }
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

struct State {
  Backend backend;
  DistanceFn fn;
};

State& state() {
  static State s = [] {
    const Backend b = detect();
    return State{b, function_for(b)};
  }();
  return s;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "?";
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::kScalar: return true;
    case Backend::kAvx2:
#if defined(TSBP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(TSBP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return state().backend; }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument(std::string("kernel backend not supported: ") + backend_name(b));
  }
  state() = State{b, function_for(b)};
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  return state().fn(a.data(), b.data(), a.size());
}

double l2(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_l2(a, b));
}

void squared_l2_rows(std::span<const double> query, const double* rows, std::size_t count,
                     double* out) {
  const DistanceFn fn = state().fn;
  const std::size_t dim = query.size();
  for (std::size_t r = 0; r < count; ++r) out[r] = fn(query.data(), rows + r * dim, dim);
}

}  // namespace tsbp::kernels
