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

#include "kincoach/skeleton.hpp"

#include <string>

#include "kincoach/error.hpp"

namespace kincoach
{
namespace
{

struct JointSpec
{
  std::string_view id;
  std::string_view label;
  Side side;
  std::initializer_list<std::string_view> dofs;
};

// clang-format off
const JointSpec kJointSpecs[kNumJoints] = {
  {"pelvis", "pelvis", Side::center, {"tilt", "list", "rotation"}},
  {"right_hip", "right hip", Side::right, {"flexion", "adduction", "rotation"}},
  {"right_knee", "right knee", Side::right, {"flexion"}},
  {"right_ankle", "right ankle", Side::right, {"dorsiflexion"}},
  {"right_subtalar", "right subtalar", Side::right, {"inversion"}},
  {"right_mtp", "right mtp", Side::right, {"flexion"}},
  {"left_hip", "left hip", Side::left, {"flexion", "adduction", "rotation"}},
  {"left_knee", "left knee", Side::left, {"flexion"}},
  {"left_ankle", "left ankle", Side::left, {"dorsiflexion"}},
  {"left_subtalar", "left subtalar", Side::left, {"inversion"}},
  {"left_mtp", "left mtp", Side::left, {"flexion"}},
  {"lumbar", "lumbar spine", Side::center, {"bending", "extension", "twist"}},
  {"thorax", "thorax", Side::center, {"bending", "extension", "twist"}},
  {"head", "head", Side::center, {"bending", "extension", "twist"}},
  {"right_scapula", "right scapula", Side::right, {"abduction", "elevation", "upward rotation"}},
  {"right_shoulder", "right shoulder", Side::right, {"flexion", "abduction", "rotation"}},
  {"right_elbow", "right elbow", Side::right, {"flexion"}},
  {"right_forearm", "right forearm", Side::right, {"pronation"}},
  {"right_wrist", "right wrist", Side::right, {"flexion", "deviation"}},
  {"left_scapula", "left scapula", Side::left, {"abduction", "elevation", "upward rotation"}},
  {"left_shoulder", "left shoulder", Side::left, {"flexion", "abduction", "rotation"}},
  {"left_elbow", "left elbow", Side::left, {"flexion"}},
  {"left_forearm", "left forearm", Side::left, {"pronation"}},
  {"left_wrist", "left wrist", Side::left, {"flexion", "deviation"}},
};
// clang-format on

}  // namespace

std::string_view to_string(Side side)
{
  switch (side) {
    case Side::right: return "right";
    case Side::left: return "left";
    case Side::center: break;
  }
  return "center";
}

SkeletonModel::SkeletonModel()
{
  int next = 0;
  for (int j = 0; j < kNumJoints; ++j) {
    const auto & spec = kJointSpecs[j];
    const int count = static_cast<int>(spec.dofs.size());
    joints_[j] = JointInfo{spec.id, spec.label, spec.side, next, count, next};
    int k = 0;
    for (auto name : spec.dofs) {
      dofs_[next + k] = DofInfo{j, name};
      ++k;
    }
    next += count;
  }
  if (next != kNumDofs) {
    throw Error(Errc::invariant, "skeleton DoF blocks do not cover 46 indices");
  }
}

const SkeletonModel & SkeletonModel::get()
{
  static const SkeletonModel model;
  return model;
}

const JointInfo & SkeletonModel::joint(int index) const
{
  if (index < 0 || index >= kNumJoints) {
    throw Error(Errc::unknown_joint, "joint index " + std::to_string(index));
  }
  return joints_[index];
}

std::optional<int> SkeletonModel::find_joint(std::string_view id) const
{
  for (int j = 0; j < kNumJoints; ++j) {
    if (joints_[j].id == id) return j;
  }
  return std::nullopt;
}

int SkeletonModel::joint_index(std::string_view id) const
{
  if (auto j = find_joint(id)) return *j;
  throw Error(Errc::unknown_joint, "'" + std::string(id) + "'");
}

const DofInfo & SkeletonModel::dof_info(int dof) const
{
  if (dof < 0 || dof >= kNumDofs) {
    throw Error(Errc::dim_mismatch, "DoF index " + std::to_string(dof));
  }
  return dofs_[dof];
}

const DofInfo & SkeletonModel::dof(int index) const { return dof_info(index); }

std::string SkeletonModel::dof_label(int dof) const
{
  const auto & d = dof_info(dof);
  return std::string(joints_[d.joint].label) + " " + std::string(d.name);
}

bool SkeletonModel::owns(int joint, int dof) const
{
  const auto & info = this->joint(joint);
  return dof >= info.first_dof && dof < info.first_dof + info.dof_count;
}

int primary_dof(int joint) { return SkeletonModel::get().joint(joint).primary_dof; }

int primary_dof(std::string_view joint_id)
{
  const auto & model = SkeletonModel::get();
  return model.joint(model.joint_index(joint_id)).primary_dof;
}

}  // namespace kincoach
