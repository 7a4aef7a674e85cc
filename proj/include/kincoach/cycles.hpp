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

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kincoach/common.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{

struct ExerciseConfig;

inline constexpr double kProminenceMin = 0.1;  // radians
inline constexpr int kDistanceMin = 5;
inline constexpr int kMinCycleFrames = 24;
inline constexpr int kMaxCycleFrames = 150;
inline constexpr int kHoldWindow = 10;
inline constexpr int kHoldMinRun = 10;
inline constexpr double kHoldPercentile = 30.0;
inline constexpr int kPhaseSliver = 3;

enum class CycleKind { repetitive, alternating, static_hold };
std::string_view to_string(CycleKind kind);

struct Phase
{
  FrameIndex start = 0;
  FrameIndex end = 0;  // inclusive
  Side side = Side::right;

  friend bool operator==(const Phase &, const Phase &) = default;
};

/// Indices refer to positions in the analysed series.
struct CycleRecord
{
  FrameIndex i_s = 0;
  FrameIndex i_e = 0;  // inclusive
  CycleKind kind = CycleKind::repetitive;
  std::vector<Phase> phases;
  int rep_index = 0;  // 1-based

  FrameIndex length() const { return i_e - i_s + 1; }

  friend bool operator==(const CycleRecord &, const CycleRecord &) = default;
};

struct PeakParams
{
  double p_min = kProminenceMin;
  int d_min = kDistanceMin;
};

struct PeakSet
{
  std::vector<std::size_t> peaks;
  std::vector<double> peak_prominences;
  std::vector<std::size_t> valleys;
  std::vector<double> valley_prominences;
};

// Strict local maxima; a flat top reports its midpoint (rounded down). The
// first and last samples are never maxima.
std::vector<std::size_t> local_maxima(std::span<const double> x);

// Height above the higher of the two minima between the peak and its nearest
// strictly higher neighbour on either side. A side that reaches the end of the
// series contributes no bound; with neither side bounded the base is the
// global minimum.
double prominence(std::span<const double> x, std::size_t peak);
std::vector<double> prominences(std::span<const double> x, std::span<const std::size_t> peaks);

// Greedy suppression: visit peaks in descending prominence (earlier index on
// ties) and drop still-kept neighbours closer than d_min. Returns kept indices
// into `peaks`, ascending.
std::vector<std::size_t> select_by_distance(std::span<const std::size_t> peaks, std::span<const double> prom,
                                            int d_min);

// Prominence filter first, then distance suppression. Throws TooShort below 3 samples.
PeakSet find_peaks(std::span<const double> x, const PeakParams & params = {});

// Valley-to-valley spans holding exactly one peak, kept if 24..150 frames long.
std::vector<CycleRecord> pair_cycles(std::span<const std::size_t> valleys, std::span<const std::size_t> peaks,
                                     CycleKind kind);

std::vector<CycleRecord> segment_cycles(std::span<const double> series, const ExerciseConfig & config,
                                        const PeakParams & params = {});

// Throws DegenerateCycle when the series is constant over the cycle.
std::vector<Phase> segment_phases(std::span<const double> series, const CycleRecord & cycle);

// Trailing population standard deviation; element k covers x[k - w + 1 .. k]
// and is attributed to frame k. Output length is n - w + 1.
std::vector<double> rolling_std(std::span<const double> x, int w = kHoldWindow);

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

// Throws TooShort below kHoldWindow samples.
std::vector<CycleRecord> detect_static_hold(std::span<const double> series);

// Dispatches on the configured cycle mode.
std::vector<CycleRecord> detect_cycles(std::span<const double> series, const ExerciseConfig & config);

/// Incremental cycle detection over a growing series. A cycle is emitted as
/// soon as every peak and valley decision it depends on can no longer change,
/// so the emitted cycles are always a prefix of the batch result on any
/// extension of the series.
class StreamingCycleDetector
{
public:
  StreamingCycleDetector(CycleKind kind, const PeakParams & params = {});
  ~StreamingCycleDetector();
  StreamingCycleDetector(StreamingCycleDetector &&) noexcept;
  StreamingCycleDetector & operator=(StreamingCycleDetector &&) noexcept;

  std::vector<CycleRecord> push(double value);
  // Batch detection over everything seen; returns the cycles not yet emitted.
  std::vector<CycleRecord> finish();

  std::span<const double> series() const { return series_; }
  std::size_t emitted() const { return emitted_; }

private:
  struct Tracker;

  std::vector<CycleRecord> advance();

  CycleKind kind_;
  PeakParams params_;
  std::vector<double> series_;
  std::unique_ptr<Tracker> peaks_;
  std::unique_ptr<Tracker> valleys_;
  std::size_t valley_cursor_ = 0;
  std::optional<std::size_t> last_valley_;
  std::size_t emitted_ = 0;
  std::optional<FrameIndex> last_emitted_start_;
};

/// Incremental hold detection. The stability threshold is the running 30th
/// percentile of every rolling deviation seen so far, so decisions only use
/// past samples; batch detection uses the percentile over the whole series.
class StreamingHoldDetector
{
public:
  std::vector<CycleRecord> push(double value);
  std::vector<CycleRecord> finish();

private:
  std::optional<CycleRecord> close_run(FrameIndex last);

  std::vector<double> series_;
  std::vector<double> sorted_stds_;
  std::optional<FrameIndex> run_start_;
  int rep_ = 0;
};

}  // namespace kincoach
