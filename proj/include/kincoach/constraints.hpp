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
#include <vector>

#include "json.hpp"
#include "kincoach/cycles.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/matrix.hpp"

namespace kincoach
{

struct ReferenceTrajectory;

inline constexpr Bound kDefaultStaticBound{0.0, 25.0};  // deg^2, i.e. std below 5 degrees

enum class JointClass { static_joint, dynamic_joint };
std::string_view to_string(JointClass cls);

struct ConstraintResult
{
  int joint = 0;
  int dof = 0;
  JointClass cls = JointClass::static_joint;
  Statistic statistic = Statistic::variance;
  double delta = 0.0;  // degrees, or degrees^2 for variance
  Bound bound;
  bool violated = false;
  std::optional<FrameIndex> key_frame;
  // Signed distance from delta to the violated bound; zero when satisfied.
  double correction = 0.0;

  friend bool operator==(const ConstraintResult &, const ConstraintResult &) = default;
};

// delta < lower or delta > upper, strictly.
bool violates(double delta, const Bound & bound);
double correction_for(double delta, const Bound & bound);

// Population variance in degrees^2 of series (radians) over [i_s, i_e]. Throws EmptyCycle.
ConstraintResult eval_static(int joint, int dof, const CycleRecord & cycle, std::span<const double> series,
                             const Bound & bound = kDefaultStaticBound);

// Extremum of series over [i_s, i_e] per the rule, earliest on ties. Throws NoKeyFrame.
FrameIndex key_frame(std::span<const double> series, FrameIndex i_s, FrameIndex i_e, KeyFrameRule rule);

// `frames` holds one row of 46 smoothed angles per series index.
ConstraintResult eval_dynamic(const ConstraintSpec & spec, const CycleRecord & cycle, const Matrix & frames,
                              const ReferenceTrajectory * ref, const ExerciseConfig & config);

// Constraints for the selected joints, ordered by joint index. Static joints
// without an explicit bound get the default variance bound. Holds only
// evaluate static joints.
std::vector<ConstraintResult> evaluate_cycle(const ExerciseConfig & config, std::span<const int> selected_joints,
                                             const CycleRecord & cycle, const Matrix & frames,
                                             const ReferenceTrajectory * ref);

nlohmann::json to_json(const ConstraintResult & result);

}  // namespace kincoach
