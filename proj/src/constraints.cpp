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

#include "kincoach/constraints.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"
#include "kincoach/reference.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{

std::string_view to_string(JointClass cls) { return cls == JointClass::static_joint ? "static" : "dynamic"; }

bool violates(double delta, const Bound & bound) { return delta < bound.lower || delta > bound.upper; }

double correction_for(double delta, const Bound & bound)
{
  if (delta < bound.lower) return bound.lower - delta;
  if (delta > bound.upper) return bound.upper - delta;
  return 0.0;
}

namespace
{

void check_cycle(std::size_t n, const CycleRecord & cycle, Errc code)
{
  if (cycle.i_s < 0 || cycle.i_e < cycle.i_s || cycle.i_e >= static_cast<FrameIndex>(n)) {
    throw Error(code, fmt::format("cycle [{}, {}] not inside series of length {}", cycle.i_s, cycle.i_e, n));
  }
}

void finish(ConstraintResult & r)
{
  r.violated = violates(r.delta, r.bound);
  r.correction = correction_for(r.delta, r.bound);
}

}  // namespace

ConstraintResult eval_static(int joint, int dof, const CycleRecord & cycle, std::span<const double> series,
                             const Bound & bound)
{
  check_cycle(series.size(), cycle, Errc::empty_cycle);
  std::vector<double> deg(static_cast<std::size_t>(cycle.length()));
  for (FrameIndex i = cycle.i_s; i <= cycle.i_e; ++i) deg[i - cycle.i_s] = rad2deg(series[i]);
  const double n = static_cast<double>(deg.size());
  const double mean = kernels::sum(deg) / n;

  ConstraintResult r;
  r.joint = joint;
  r.dof = dof;
  r.cls = JointClass::static_joint;
  r.statistic = Statistic::variance;
  r.delta = kernels::sum_sq_dev(deg, mean) / n;
  r.bound = bound;
  finish(r);
  return r;
}

FrameIndex key_frame(std::span<const double> series, FrameIndex i_s, FrameIndex i_e, KeyFrameRule rule)
{
  if (i_s < 0 || i_e < i_s || i_e >= static_cast<FrameIndex>(series.size())) {
    throw Error(Errc::no_key_frame, fmt::format("no frames in [{}, {}]", i_s, i_e));
  }
  FrameIndex best = i_s;
  for (FrameIndex i = i_s + 1; i <= i_e; ++i) {
    const bool better = rule == KeyFrameRule::cycle_max ? series[i] > series[best] : series[i] < series[best];
    if (better) best = i;
  }
  return best;
}

ConstraintResult eval_dynamic(const ConstraintSpec & spec, const CycleRecord & cycle, const Matrix & frames,
                              const ReferenceTrajectory * ref, const ExerciseConfig & config)
{
  check_cycle(frames.rows(), cycle, Errc::no_key_frame);
  const int dof = config.primary_dof[spec.joint];
  const auto rep = frames.column(config.representative_dof());
  const FrameIndex i_key = key_frame(rep, cycle.i_s, cycle.i_e, config.key_frame_rule);
  const double user_deg = rad2deg(frames(i_key, dof));

  ConstraintResult r;
  r.joint = spec.joint;
  r.dof = dof;
  r.cls = JointClass::dynamic_joint;
  r.statistic = spec.statistic;
  r.bound = spec.bound;
  r.key_frame = i_key;
  if (spec.statistic == Statistic::key_frame_angle) {
    r.delta = user_deg;
  } else if (spec.statistic == Statistic::key_frame_deviation) {
    if (!ref) throw Error(Errc::schema, "deviation constraint needs a reference trajectory");
    const auto ref_rep = ref->angles.column(config.representative_dof());
    const FrameIndex ref_key = key_frame(ref_rep, 0, ref->length() - 1, config.key_frame_rule);
    r.delta = std::abs(user_deg - rad2deg(ref->angles(ref_key, dof)));
  } else {
    throw Error(Errc::schema, "variance is not a key-frame statistic");
  }
  finish(r);
  return r;
}

std::vector<ConstraintResult> evaluate_cycle(const ExerciseConfig & config, std::span<const int> selected_joints,
                                             const CycleRecord & cycle, const Matrix & frames,
                                             const ReferenceTrajectory * ref)
{
  std::vector<int> joints(selected_joints.begin(), selected_joints.end());
  std::sort(joints.begin(), joints.end());
  std::vector<ConstraintResult> out;
  for (int j : joints) {
    const ConstraintSpec * spec = config.constraint_for(j);
    if (config.is_static(j)) {
      const Bound bound = spec ? spec->bound : kDefaultStaticBound;
      const int dof = config.primary_dof[j];
      out.push_back(eval_static(j, dof, cycle, frames.column(dof), bound));
    } else if (spec && cycle.kind != CycleKind::static_hold) {
      out.push_back(eval_dynamic(*spec, cycle, frames, ref, config));
    }
  }
  return out;
}

nlohmann::json to_json(const ConstraintResult & r)
{
  nlohmann::json j = {
    {"joint", std::string(SkeletonModel::get().joint(r.joint).id)},
    {"dof", r.dof},
    {"class", std::string(to_string(r.cls))},
    {"statistic", std::string(to_string(r.statistic))},
    {"delta", r.delta},
    {"lower", r.bound.lower},
    {"upper", r.bound.upper},
    {"violated", r.violated},
    {"correction", r.correction},
  };
  j["key_frame"] = r.key_frame ? nlohmann::json(*r.key_frame) : nlohmann::json(nullptr);
  return j;
}

}  // namespace kincoach
