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
#include <span>

// Feature-distance kernels. Every backend accumulates squared differences
// into four lanes (element i goes to lane i % 4) and reduces them as
// (l0 + l1) + (l2 + l3), so all backends return bit-identical results.

namespace tsbp::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

const char* backend_name(Backend b);

double squared_l2_scalar(const double* a, const double* b, std::size_t n);
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
double squared_l2_avx2(const double* a, const double* b, std::size_t n);
#endif
#if defined(__aarch64__)
double squared_l2_neon(const double* a, const double* b, std::size_t n);
#endif

bool backend_supported(Backend b);

/// Backend picked at startup: the widest one the CPU supports, unless the
/// TSBP_KERNEL environment variable names another supported backend.
Backend active_backend();

/// Throws std::invalid_argument if the CPU lacks the backend.
void set_backend(Backend b);

/// Sizes must match; not checked here.
double squared_l2(std::span<const double> a, std::span<const double> b);
double l2(std::span<const double> a, std::span<const double> b);

/// out[r] = squared_l2(query, rows + r * dim) for r in [0, count).
void squared_l2_rows(std::span<const double> query, const double* rows, std::size_t count,
                     double* out);

}  // namespace tsbp::kernels
