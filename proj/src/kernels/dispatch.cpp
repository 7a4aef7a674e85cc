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

#include <cassert>
#include <cstdlib>

#include "kincoach/kernels.hpp"

namespace kincoach::kernels
{
namespace
{

struct Table
{
  Backend backend;
  double (*dot)(const double *, const double *, std::size_t);
  double (*sum)(const double *, std::size_t);
  double (*sum_sq_dev)(const double *, std::size_t, double);
  void (*axpy)(double, const double *, double *, std::size_t);
};

constexpr Table kScalar{Backend::scalar, scalar::dot, scalar::sum, scalar::sum_sq_dev, scalar::axpy};
#ifdef KINCOACH_HAVE_AVX2
constexpr Table kAvx2{Backend::avx2, avx2::dot, avx2::sum, avx2::sum_sq_dev, avx2::axpy};
#endif
#ifdef KINCOACH_HAVE_NEON
constexpr Table kNeon{Backend::neon, neon::dot, neon::sum, neon::sum_sq_dev, neon::axpy};
#endif

const Table & table_for(Backend backend)
{
  switch (backend) {
#ifdef KINCOACH_HAVE_AVX2
    case Backend::avx2:
      return kAvx2;
#endif
#ifdef KINCOACH_HAVE_NEON
    case Backend::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

Backend widest_available()
{
  if (available(Backend::avx2)) return Backend::avx2;
  if (available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const Table * initial_table()
{
  Backend choice = widest_available();
  if (const char * env = std::getenv("KINCOACH_SIMD")) {
    if (auto requested = parse_backend(env); requested && available(*requested)) {
      choice = *requested;
    }
  }
  return &table_for(choice);
}

const Table *& current()
{
  static const Table * table = initial_table();
  return table;
}

}  // namespace

std::string_view to_string(Backend backend)
{
  switch (backend) {
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
    case Backend::scalar:
      break;
  }
  return "scalar";
}

std::optional<Backend> parse_backend(std::string_view name)
{
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  return std::nullopt;
}

bool available(Backend backend)
{
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#ifdef KINCOACH_HAVE_AVX2
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#ifdef KINCOACH_HAVE_NEON
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active() { return current()->backend; }

void select(Backend backend)
{
  if (available(backend)) {
    current() = &table_for(backend);
  }
}

double dot(std::span<const double> a, std::span<const double> b)
{
  assert(a.size() == b.size());
  return current()->dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> x) { return current()->sum(x.data(), x.size()); }

double sum_sq_dev(std::span<const double> x, double center)
{
  return current()->sum_sq_dev(x.data(), x.size(), center);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
  assert(x.size() == y.size());
  current()->axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace kincoach::kernels
