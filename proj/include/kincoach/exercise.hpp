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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kincoach/common.hpp"

namespace kincoach
{

enum class CycleMode { repetitive, alternating, static_hold };
enum class KeyFrameRule { cycle_min, cycle_max };
enum class Statistic { variance, key_frame_angle, key_frame_deviation };

std::string_view to_string(CycleMode mode);
std::string_view to_string(KeyFrameRule rule);
std::string_view to_string(Statistic statistic);

/// Acceptable range [lower, upper]; degrees, or degrees^2 for variance.
struct Bound
{
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const Bound &, const Bound &) = default;
};

struct ConstraintSpec
{
  int joint = 0;
  Statistic statistic = Statistic::variance;
  Bound bound;

  friend bool operator==(const ConstraintSpec &, const ConstraintSpec &) = default;
};

// Raised-cosine motion rule for one DoF: base + amp * (1 - cos(2*pi*(tau - phase))) / 2
// over a repetition phase tau in [0, 1).
struct DofMotion
{
  int dof = 0;
  double base_deg = 0.0;
  double amp_deg = 0.0;
  double phase = 0.0;

  friend bool operator==(const DofMotion &, const DofMotion &) = default;
};

struct MotionProfile
{
  double default_amp_deg = 0.0;
  std::vector<DofMotion> dofs;

  friend bool operator==(const MotionProfile &, const MotionProfile &) = default;
};

struct ExerciseConfig
{
  std::string exercise_id;
  CycleMode cycle_mode = CycleMode::repetitive;
  int representative_joint = 0;
  KeyFrameRule key_frame_rule = KeyFrameRule::cycle_max;
  std::array<int, kNumJoints> primary_dof{};
  std::vector<int> static_joints;
  std::vector<int> dynamic_joints;
  // Expert salient-joint table; supervision labels and the fallback when no
  // trained scorer is supplied.
  std::vector<int> salient_joints;
  std::vector<ConstraintSpec> constraints;
  std::string reference_id;
  double min_confidence = 0.5;
  std::optional<MotionProfile> motion;

  int representative_dof() const { return primary_dof[representative_joint]; }
  bool is_static(int joint) const;
  bool is_dynamic(int joint) const;
  const ConstraintSpec * constraint_for(int joint) const;

  friend bool operator==(const ExerciseConfig &, const ExerciseConfig &) = default;
};

ExerciseConfig parse_exercise_config(const nlohmann::json & doc);
ExerciseConfig load_exercise_config(const std::filesystem::path & path);
nlohmann::json to_json(const ExerciseConfig & config);
// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string serialize_exercise_config(const ExerciseConfig & config);

}  // namespace kincoach
