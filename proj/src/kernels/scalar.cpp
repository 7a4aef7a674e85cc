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

#include "kincoach/kernels.hpp"

namespace kincoach::kernels::scalar
{

double dot(const double * a, const double * b, std::size_t n)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double sum(const double * x, std::size_t n)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i];
  }
  return acc;
}

double sum_sq_dev(const double * x, std::size_t n, double center)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - center;
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double * x, double * y, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

}  // namespace kincoach::kernels::scalar
