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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kincoach
{

inline constexpr double kDefaultTolerance = 1.0;  // seconds

struct TFScoreReport
{
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double tol_s = kDefaultTolerance;
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (pred, truth) indices into the sorted inputs
};

// One-to-one greedy matching in time order within +-tol_s.
TFScoreReport tf_score(std::vector<double> predicted, std::vector<double> truth, double tol_s = kDefaultTolerance);

}  // namespace kincoach
