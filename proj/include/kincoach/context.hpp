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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kincoach/common.hpp"
#include "kincoach/constraints.hpp"
#include "kincoach/preprocess.hpp"

namespace kincoach
{

inline constexpr std::string_view kFeedbackMarker = "<|feedback|>";
inline constexpr std::string_view kWarmupTag = "[warmup]";
inline constexpr std::string_view kMorphMissing = "Warning: body shape unavailable; morphometric context omitted.";

struct PoseEntry
{
  int joint = 0;
  int dof = 0;
  int degrees = 0;  // floor of the angle in degrees

  friend bool operator==(const PoseEntry &, const PoseEntry &) = default;
};

struct ContextBundle
{
  FrameIndex t = 0;
  std::optional<MorphometricProfile> morph;
  std::string morph_text;  // empty when morph is absent
  std::vector<PoseEntry> pose_state;
  std::vector<ConstraintResult> violations;
  std::string motion_text;
  std::vector<std::string> warnings;
  bool warmup = false;
};

// Fixed two-decimal rendering; exact ties round to even.
std::string format_2dp(double value);
// Shortest round-trip decimal, no trailing ".0".
std::string format_shortest(double value);
int floor_degrees(double radians);

std::string render_morph(const MorphometricProfile & profile);

// One entry per joint, ascending joint index, using each joint's primary DoF.
std::vector<PoseEntry> pose_state(const Pose & q, std::span<const int> joints,
                                  const std::array<int, kNumJoints> & primary);
std::string render_pose(std::span<const PoseEntry> pose);

std::string render_violation(const ConstraintResult & v);
std::string render_violations(std::span<const ConstraintResult> violations);
// Pose line, newline, form-issue line.
std::string render_motion(std::span<const PoseEntry> pose, std::span<const ConstraintResult> violations);

// Fills morph_text and motion_text from the structured fields.
ContextBundle make_bundle(FrameIndex t, std::optional<MorphometricProfile> morph, std::vector<PoseEntry> pose,
                          std::vector<ConstraintResult> violations, std::vector<std::string> warnings, bool warmup);

// Layout, one item per line:
//   [warmup]                      (only when flagged)
//   Warning: ...                  (zero or more)
//   Current pose: ...
//   Form issues: ...
//   User body: ...  | morph-missing warning
//   <|feedback|>
std::string assemble_prompt(const ContextBundle & bundle);

nlohmann::json to_json(const ContextBundle & bundle);

}  // namespace kincoach
