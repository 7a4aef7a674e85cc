// Copyright 2026 The kincoach Authors
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

#include <optional>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by smoothing, similarity scoring and the
// dense layers. Every entry point has a scalar reference implementation and
// optional SIMD variants chosen once at startup. Variants differ from the
// scalar reference only by floating-point reassociation.
namespace kincoach::kernels
{

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend backend);
std::optional<Backend> parse_backend(std::string_view name);

// Compiled in and supported by the running CPU.
bool available(Backend backend);

// Currently dispatched backend. The initial choice is the widest available
// one, overridable through KINCOACH_SIMD=scalar|avx2|neon.
Backend active();

// Switches the dispatch table. Not thread-safe; meant for tests and tools.
void select(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
// sum_i (x_i - center)^2
double sum_sq_dev(std::span<const double> x, double center);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

#define KINCOACH_KERNEL_DECLS                                                 \
  double dot(const double * a, const double * b, std::size_t n);              \
  double sum(const double * x, std::size_t n);                                \
  double sum_sq_dev(const double * x, std::size_t n, double center);          \
  void axpy(double alpha, const double * x, double * y, std::size_t n);

namespace scalar { KINCOACH_KERNEL_DECLS }
namespace avx2 { KINCOACH_KERNEL_DECLS }
namespace neon { KINCOACH_KERNEL_DECLS }

#undef KINCOACH_KERNEL_DECLS

}  // namespace kincoach::kernels
