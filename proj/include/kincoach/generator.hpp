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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "kincoach/cycles.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/preprocess.hpp"
#include "kincoach/reference.hpp"
#include "kincoach/salience.hpp"

namespace kincoach
{

inline constexpr int kDefaultRefLength = 61;
inline constexpr double kMinErrorMargin = 2.0;

/// One planned violation. Repetition exercises list the 1-based reps to
/// corrupt; holds give a time span instead.
struct PlannedError
{
  int joint = 0;
  std::vector<int> reps;
  double start_s = 0.0;
  double duration_s = 0.0;
  double margin_deg = 4.0;  // distance beyond the violated bound, std scale for variance bounds
};

struct ErrorPlan
{
  std::vector<PlannedError> errors;
};

// {"errors":[{"joint":..,"reps":[..],"margin_deg":..}|{"joint":..,"start_s":..,"duration_s":..,"margin_deg":..}]}
ErrorPlan parse_error_plan(const nlohmann::json & doc);
ErrorPlan load_error_plan(const std::filesystem::path & path);

struct GeneratorOptions
{
  int reps = 5;
  double period_s = 2.0;
  double period_jitter = 0.05;
  double amp_jitter = 0.015;
  double noise_deg = 1.0;
  double hold_s = 10.0;  // static-hold duration
  std::uint64_t seed = 0;
  bool with_beta = true;
};

struct InjectedError
{
  int joint = 0;
  int rep = 0;  // 1-based; 0 for holds
  Statistic statistic = Statistic::variance;
  double target_deg = 0.0;  // intended statistic after smoothing (std for variance)
  FrameIndex start = 0;
  FrameIndex end = 0;
};

struct SyntheticSession
{
  std::vector<AngleFrame> frames;
  std::vector<CycleRecord> truth_cycles;
  std::vector<InjectedError> errors;
  std::vector<FrameIndex> feedback_truth;  // frame at which each corrupted rep or wobble ends
};

// Raised-cosine repetitions from the config's motion profile, smoothed-gain
// compensated so clean reps meet every bound and corrupted reps miss theirs
// by the planned margin. Throws BadSpec.
SyntheticSession generate_session(const ExerciseConfig & config, const GeneratorOptions & options,
                                  const ErrorPlan & plan = {});

// One noiseless repetition sampled at n_ref points, valley to valley.
ReferenceTrajectory build_reference(const ExerciseConfig & config, int n_ref = kDefaultRefLength);

nlohmann::json truth_to_json(const SyntheticSession & session);

// Descriptor/label pairs for salience training: per exercise, the reference
// ROM with seeded multiplicative jitter. Vocabulary is the sorted exercise ids.
SalienceDataset synthetic_salience_dataset(std::span<const ExerciseConfig> configs, int per_exercise,
                                           std::uint64_t seed);

}  // namespace kincoach
