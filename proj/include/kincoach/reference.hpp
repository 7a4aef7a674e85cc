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

#include <filesystem>
#include <string>

#include "kincoach/matrix.hpp"

namespace kincoach
{

inline constexpr int kMinRefLength = 24;
inline constexpr int kMaxRefLength = 150;

/// Canonical single-repetition trajectory, N_ref x 46 radians at 30 fps.
struct ReferenceTrajectory
{
  std::string exercise_id;
  int fps = 30;
  Matrix angles;

  int length() const { return static_cast<int>(angles.rows()); }

  friend bool operator==(const ReferenceTrajectory &, const ReferenceTrajectory &) = default;
};

// Throws Schema on a wrong shape, length outside [24, 150] or non-finite values.
void validate(const ReferenceTrajectory & ref);

// `csv_path` is `<name>.csv`; the sidecar lives next to it as `<name>.json`.
ReferenceTrajectory load_reference(const std::filesystem::path & csv_path);
void save_reference(const ReferenceTrajectory & ref, const std::filesystem::path & csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path & csv_path);

}  // namespace kincoach
