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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kincoach/common.hpp"

namespace kincoach
{

inline constexpr double kSmoothSigma = 2.0;
inline constexpr int kWindowSamples = 12;
inline constexpr double kWindowStride = kFps / 4.0;
inline constexpr FrameIndex kWarmupHistory = 90;

struct AngleFrame
{
  FrameIndex t = 0;
  Pose q{};
  std::optional<Shape> beta;
  double confidence = 1.0;

  friend bool operator==(const AngleFrame &, const AngleFrame &) = default;
};

// Throws StreamFormat for non-finite values, |q_i| > pi or confidence outside [0, 1].
void validate(const AngleFrame & frame);

// One JSON-Lines record: {"t":int,"q":[46],"beta":[10]?,"conf":float}.
AngleFrame parse_frame(std::string_view line, std::size_t line_no);
std::string format_frame(const AngleFrame & frame);

// --- smoothing -------------------------------------------------------------

int kernel_radius(double sigma);
// Normalized Gaussian taps, length 2 * radius + 1.
std::vector<double> gaussian_kernel(double sigma);
// Index into [0, n) under half-sample symmetric reflection (d c b a | a b c d).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);
// Smoothed value at `i` using reflect padding on a series of length x.size().
// Batch and incremental smoothing both go through this function.
double smooth_at(std::span<const double> x, std::size_t i, std::span<const double> kernel);
std::vector<double> gaussian_smooth(std::span<const double> x, double sigma = kSmoothSigma);

// --- windowing -------------------------------------------------------------

struct KinematicWindow
{
  std::vector<AngleFrame> frames;
  std::optional<Shape> beta_bar;
  FrameIndex t_end = 0;
  bool warmup = false;
};

// Source frame indices of the 4 Hz grid ending at t_end, oldest first,
// clamped to `first` and de-duplicated.
std::vector<FrameIndex> window_grid(FrameIndex t_end, FrameIndex first = 0);

// `stream` must be sorted by t. Frames after t_end are never read.
KinematicWindow make_window(std::span<const AngleFrame> stream, FrameIndex t_end);

std::optional<Shape> pool_shape(std::span<const AngleFrame> frames);

// --- morphometrics ---------------------------------------------------------

struct MorphometricProfile
{
  double height_m = 0.0;
  double mass_kg = 0.0;
  double chest_m = 0.0;
  double waist_m = 0.0;
  double hip_m = 0.0;

  friend bool operator==(const MorphometricProfile &, const MorphometricProfile &) = default;
};

// Throws OutOfBand unless every field is positive and height is in [0.5, 2.5] m.
void validate(const MorphometricProfile & profile);

/// profile = base + M * beta, rows of M ordered height, mass, chest, waist, hip.
struct AffineMorphStub
{
  MorphometricProfile base;
  std::array<std::array<double, kNumShape>, 5> m{};

  static const AffineMorphStub & bundled();
};

MorphometricProfile morphometrics_from_beta(const Shape & beta_bar,
                                            const AffineMorphStub & stub = AffineMorphStub::bundled());

// {"height_m":..,"mass_kg":..,"chest_m":..,"waist_m":..,"hip_m":..}
MorphometricProfile parse_morph_profile(const nlohmann::json & doc);
MorphometricProfile load_morph_profile(const std::filesystem::path & path);

// --- stream buffer ---------------------------------------------------------

struct StreamWarning
{
  FrameIndex t = 0;
  std::string text;
};

/// Per-session frame store. Fills gaps by repeating the last pose and holds
/// the last valid pose over low-confidence frames.
class StreamBuffer
{
public:
  explicit StreamBuffer(double min_confidence = 0.5) : min_confidence_(min_confidence) {}

  // Returns the number of frames appended (1 + filled gap length).
  std::size_t push(AngleFrame frame);

  const std::vector<AngleFrame> & frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  FrameIndex first_t() const { return frames_.empty() ? 0 : frames_.front().t; }
  bool held(std::size_t index) const { return held_[index]; }
  const std::vector<StreamWarning> & warnings() const { return warnings_; }

  KinematicWindow window(FrameIndex t_end) const;
  // Warnings attached to frames inside the window ending at t_end.
  std::vector<std::string> window_warnings(FrameIndex t_end) const;

private:
  double min_confidence_;
  std::vector<AngleFrame> frames_;
  std::vector<bool> held_;
  std::vector<StreamWarning> warnings_;
  std::optional<Pose> last_valid_;
};

}  // namespace kincoach
