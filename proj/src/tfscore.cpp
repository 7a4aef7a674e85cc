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

#include "kincoach/tfscore.hpp"

#include <algorithm>

#include "kincoach/error.hpp"

namespace kincoach
{

TFScoreReport tf_score(std::vector<double> predicted, std::vector<double> truth, double tol_s)
{
  if (!(tol_s > 0.0)) throw Error(Errc::schema, "tolerance must be positive");
  std::sort(predicted.begin(), predicted.end());
  std::sort(truth.begin(), truth.end());
  // Frame times converted to seconds land a hair off the tolerance edge.
  const double tol = tol_s + 1e-9;

  TFScoreReport r;
  r.tol_s = tol_s;
  std::size_t j = 0;
  for (std::size_t i = 0; i < predicted.size() && j < truth.size(); ++i) {
    while (j < truth.size() && truth[j] < predicted[i] - tol) ++j;
    if (j < truth.size() && truth[j] <= predicted[i] + tol) r.matches.emplace_back(i, j++);
  }
  const double m = static_cast<double>(r.matches.size());
  r.precision = predicted.empty() ? 0.0 : m / predicted.size();
  if (truth.empty()) {
    r.recall = predicted.empty() ? 1.0 : 0.0;
  } else {
    r.recall = m / truth.size();
  }
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace kincoach
