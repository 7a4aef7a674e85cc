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

#include "kincoach/common.hpp"

namespace kincoach
{

enum class Side { center, right, left };

std::string_view to_string(Side side);

struct JointInfo
{
  std::string_view id;     // config identifier, e.g. "right_knee"
  std::string_view label;  // rendered name, e.g. "right knee"
  Side side;
  int first_dof;
  int dof_count;
  int primary_dof;
};

struct DofInfo
{
  int joint;
  std::string_view name;  // e.g. "flexion"
};

/// The fixed 24-joint, 46-DoF Euler-angle skeleton.
///
/// DoF blocks: pelvis 0-2; right leg 3-9; left leg 10-16; spine 17-25
/// (lumbar, thorax, head); right arm 26-35; left arm 36-45. Indices are
/// zero-based. The primary DoF of every joint is the first index of its
/// block; for hip, knee, shoulder and elbow that index is the flexion DoF.
class SkeletonModel
{
public:
  static const SkeletonModel & get();

  std::span<const JointInfo> joints() const { return joints_; }
  const JointInfo & joint(int index) const;
  std::optional<int> find_joint(std::string_view id) const;
  // Throws UnknownJoint.
  int joint_index(std::string_view id) const;

  const DofInfo & dof(int index) const;
  int joint_of_dof(int dof) const { return dof_info(dof).joint; }
  // "<joint label> <dof name>", e.g. "right knee flexion"
  std::string dof_label(int dof) const;

  bool owns(int joint, int dof) const;

private:
  SkeletonModel();
  const DofInfo & dof_info(int dof) const;

  std::array<JointInfo, kNumJoints> joints_;
  std::array<DofInfo, kNumDofs> dofs_;
};

/// d(j): the primary DoF used for cycle detection and key-frame statistics.
int primary_dof(int joint);
int primary_dof(std::string_view joint_id);

}  // namespace kincoach
