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
#include <vector>

#include "kincoach/cycles.hpp"
#include "kincoach/matrix.hpp"

namespace kincoach
{

inline constexpr double kWeightCos = 0.4;
inline constexpr double kWeightPearson = 0.3;
inline constexpr double kWeightVel = 0.2;
inline constexpr double kWeightAmp = 0.1;

/// User cycle resampled onto the reference clock.
struct AlignedCycle
{
  Matrix angles;          // n_ref x dofs.size()
  std::vector<int> dofs;  // column -> DoF index
  CycleRecord source;
  // phi(k) = i_s + (k - 1) * step, k = 1..n_ref
  double step = 0.0;
};

// Linear interpolation of series[i_s..i_e] onto n_ref evenly spaced points
// that hit both endpoints. Throws DegenerateCycle when i_s == i_e and BadNRef
// when n_ref < 2.
std::vector<double> resample(std::span<const double> series, FrameIndex i_s, FrameIndex i_e, int n_ref);
// Column-wise resample of rows [i_s, i_e] of a frames x columns matrix.
Matrix resample(const Matrix & frames, FrameIndex i_s, FrameIndex i_e, int n_ref);

Matrix select_columns(const Matrix & m, std::span<const int> columns);

// `frames` holds one row of 46 angles per series index.
AlignedCycle align_cycle(const Matrix & frames, const CycleRecord & cycle, std::span<const int> dofs, int n_ref);

struct QualityScore
{
  double sim_cos = 0.0;
  double sim_pearson = 0.0;
  double sim_vel = 0.0;
  double sim_amp = 0.0;
  double s_cycle = 0.0;

  friend bool operator==(const QualityScore &, const QualityScore &) = default;
};

// Cosine of two vectors; 1 when both are zero, 0 when exactly one is.
double cosine(std::span<const double> a, std::span<const double> b);
// Per-column z-score (population std); constant columns become zero.
Matrix zscore_columns(const Matrix & m);
// Row differences, (n - 1) x cols.
Matrix row_diff(const Matrix & m);

// `user` and `ref` share shape n_ref x dofs. Throws DimMismatch.
QualityScore quality_score(const Matrix & user, const Matrix & ref);
QualityScore quality_score(const AlignedCycle & aligned, const Matrix & ref_angles);

// Index of the highest s_cycle, earliest on ties; nullopt when empty.
std::optional<std::size_t> best_cycle(std::span<const QualityScore> scores);

}  // namespace kincoach
