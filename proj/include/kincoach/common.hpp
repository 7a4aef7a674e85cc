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
#include <cstdint>
#include <numbers>

namespace kincoach
{

inline constexpr int kNumDofs = 46;
inline constexpr int kNumJoints = 24;
inline constexpr int kNumShape = 10;
inline constexpr double kFps = 30.0;

using Pose = std::array<double, kNumDofs>;
using Shape = std::array<double, kNumShape>;
using FrameIndex = std::int64_t;

constexpr double rad2deg(double rad) { return rad * (180.0 / std::numbers::pi); }
constexpr double deg2rad(double deg) { return deg * (std::numbers::pi / 180.0); }

constexpr double frames_to_seconds(FrameIndex t) { return static_cast<double>(t) / kFps; }

}  // namespace kincoach
