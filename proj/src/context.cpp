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

#include "kincoach/context.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "kincoach/skeleton.hpp"

namespace kincoach
{

std::string format_2dp(double value) { return fmt::format("{:.2f}", value); }

std::string format_shortest(double value) { return fmt::format("{}", value); }

int floor_degrees(double radians) { return static_cast<int>(std::floor(rad2deg(radians))); }

std::string render_morph(const MorphometricProfile & p)
{
  return fmt::format("User body: height {} m, mass {} kg, chest {} m, waist {} m, hips {} m.", format_2dp(p.height_m),
                     format_2dp(p.mass_kg), format_2dp(p.chest_m), format_2dp(p.waist_m), format_2dp(p.hip_m));
}

std::vector<PoseEntry> pose_state(const Pose & q, std::span<const int> joints,
                                  const std::array<int, kNumJoints> & primary)
{
  std::vector<int> sorted(joints.begin(), joints.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<PoseEntry> out;
  for (int j : sorted) out.push_back({j, primary[j], floor_degrees(q[primary[j]])});
  return out;
}

std::string render_pose(std::span<const PoseEntry> pose)
{
  const auto & model = SkeletonModel::get();
  std::string s = "Current pose: ";
  for (std::size_t i = 0; i < pose.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt::format("{} {}°", model.joint(pose[i].joint).label, pose[i].degrees);
  }
  s += '.';
  return s;
}

std::string render_violation(const ConstraintResult & v)
{
  const auto & model = SkeletonModel::get();
  std::string joint(model.joint(v.joint).label);
  joint[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(joint[0])));
  const bool low = v.delta < v.bound.lower;
  const double bound = low ? v.bound.lower : v.bound.upper;
  // Variance is reported on the standard-deviation scale.
  const bool var = v.statistic == Statistic::variance;
  const double shown = var ? std::sqrt(v.delta) : v.delta;
  const double shown_bound = var ? std::sqrt(bound) : bound;
  return fmt::format("{} {} {} ({}° detected, {}° required)", joint, model.dof(v.dof).name,
                     low ? "insufficient" : "excessive", static_cast<long long>(std::floor(shown)),
                     format_shortest(shown_bound));
}

std::string render_violations(std::span<const ConstraintResult> violations)
{
  std::vector<const ConstraintResult *> flagged;
  for (const auto & v : violations) {
    if (v.violated) flagged.push_back(&v);
  }
  std::stable_sort(flagged.begin(), flagged.end(), [](auto * a, auto * b) { return a->joint < b->joint; });
  if (flagged.empty()) return "Form issues: none";
  std::string s = "Form issues: ";
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (i > 0) s += "; ";
    s += render_violation(*flagged[i]);
  }
  return s;
}

std::string render_motion(std::span<const PoseEntry> pose, std::span<const ConstraintResult> violations)
{
  return render_pose(pose) + "\n" + render_violations(violations);
}

ContextBundle make_bundle(FrameIndex t, std::optional<MorphometricProfile> morph, std::vector<PoseEntry> pose,
                          std::vector<ConstraintResult> violations, std::vector<std::string> warnings, bool warmup)
{
  ContextBundle b;
  b.t = t;
  b.morph = morph;
  b.morph_text = morph ? render_morph(*morph) : std::string{};
  b.pose_state = std::move(pose);
  b.violations = std::move(violations);
  b.motion_text = render_motion(b.pose_state, b.violations);
  b.warnings = std::move(warnings);
  b.warmup = warmup;
  return b;
}

std::string assemble_prompt(const ContextBundle & b)
{
  std::string s;
  if (b.warmup) s += fmt::format("{}\n", kWarmupTag);
  for (const auto & w : b.warnings) s += fmt::format("Warning: {}\n", w);
  s += b.motion_text;
  s += '\n';
  s += b.morph ? b.morph_text : std::string(kMorphMissing);
  s += '\n';
  s += kFeedbackMarker;
  return s;
}

nlohmann::json to_json(const ContextBundle & b)
{
  using nlohmann::json;
  const auto & model = SkeletonModel::get();
  json pose = json::array();
  for (const auto & p : b.pose_state) {
    pose.push_back({{"joint", std::string(model.joint(p.joint).id)}, {"dof", p.dof}, {"deg", p.degrees}});
  }
  json violations = json::array();
  for (const auto & v : b.violations) {
    if (v.violated) violations.push_back(to_json(v));
  }
  json morph = nullptr;
  if (b.morph) {
    morph = {{"height_m", b.morph->height_m},
             {"mass_kg", b.morph->mass_kg},
             {"chest_m", b.morph->chest_m},
             {"waist_m", b.morph->waist_m},
             {"hip_m", b.morph->hip_m}};
  }
  return {{"t", b.t},
          {"morph", morph},
          {"morph_text", b.morph_text},
          {"pose_state", pose},
          {"violations", violations},
          {"motion_text", b.motion_text},
          {"warnings", b.warnings},
          {"warmup", b.warmup},
          {"prompt", assemble_prompt(b)}};
}

}  // namespace kincoach
