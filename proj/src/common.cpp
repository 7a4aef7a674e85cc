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

#include <cmath>
#include <cstdlib>
#include <string>

#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"
#include "kincoach/matrix.hpp"
#include "kincoach/random.hpp"

namespace kincoach
{

std::string_view to_string(Errc code)
{
  switch (code) {
    case Errc::schema: return "SchemaError";
    case Errc::unknown_joint: return "UnknownJoint";
    case Errc::inverted_bound: return "InvertedBound";
    case Errc::empty_series: return "EmptySeries";
    case Errc::out_of_band: return "OutOfBand";
    case Errc::dim_mismatch: return "DimMismatch";
    case Errc::bad_k: return "BadK";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::too_short: return "TooShort";
    case Errc::degenerate_cycle: return "DegenerateCycle";
    case Errc::bad_nref: return "BadNRef";
    case Errc::empty_cycle: return "EmptyCycle";
    case Errc::no_key_frame: return "NoKeyFrame";
    case Errc::bad_target: return "BadTarget";
    case Errc::stream_format: return "StreamFormatError";
    case Errc::bad_spec: return "BadSpec";
    case Errc::io: return "IoError";
    case Errc::invariant: return "InvariantViolation";
  }
  return "Error";
}

int exit_code(Errc code)
{
  switch (code) {
    case Errc::invariant:
    case Errc::out_of_band:
      return 3;
    default:
      return 2;
  }
}

double Rng::normal()
{
  // u1 in (0, 1] keeps the log finite
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t seed_from_env(std::uint64_t fallback)
{
  if (const char * env = std::getenv("KINCOACH_SEED")) {
    char * end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') {
      return v;
    }
  }
  return fallback;
}

Matrix matmul(const Matrix & a, const Matrix & b)
{
  if (a.cols() != b.rows()) {
    throw Error(Errc::dim_mismatch, "matmul inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      kernels::axpy(a(i, k), b.row(k), out);
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix & a, const Matrix & b)
{
  if (a.rows() != b.rows()) {
    throw Error(Errc::dim_mismatch, "matmul_tn row counts differ");
  }
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      kernels::axpy(a(k, i), b.row(k), c.row(i));
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix & a, const Matrix & b)
{
  if (a.cols() != b.cols()) {
    throw Error(Errc::dim_mismatch, "matmul_nt column counts differ");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      c(i, j) = kernels::dot(a.row(i), b.row(j));
    }
  }
  return c;
}

}  // namespace kincoach
