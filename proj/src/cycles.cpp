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

#include "kincoach/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "kincoach/error.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/kernels.hpp"

namespace kincoach
{

std::string_view to_string(CycleKind kind)
{
  switch (kind) {
    case CycleKind::alternating: return "alternating";
    case CycleKind::static_hold: return "static_hold";
    case CycleKind::repetitive: break;
  }
  return "repetitive";
}

std::vector<std::size_t> local_maxima(std::span<const double> x)
{
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  if (n < 3) return out;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        out.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
      i = ahead;
      continue;
    }
    ++i;
  }
  return out;
}

double prominence(std::span<const double> x, std::size_t peak)
{
  const double y = x[peak];
  const double inf = std::numeric_limits<double>::infinity();

  double left = y;
  bool left_bounded = false;
  for (std::size_t i = peak; i-- > 0;) {
    if (x[i] > y) {
      left_bounded = true;
      break;
    }
    left = std::min(left, x[i]);
  }
  double right = y;
  bool right_bounded = false;
  for (std::size_t i = peak + 1; i < x.size(); ++i) {
    if (x[i] > y) {
      right_bounded = true;
      break;
    }
    right = std::min(right, x[i]);
  }
  double base;
  if (left_bounded || right_bounded) {
    base = std::max(left_bounded ? left : -inf, right_bounded ? right : -inf);
  } else {
    base = *std::min_element(x.begin(), x.end());
  }
  return y - base;
}

std::vector<double> prominences(std::span<const double> x, std::span<const std::size_t> peaks)
{
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t p : peaks) out.push_back(prominence(x, p));
  return out;
}

std::vector<std::size_t> select_by_distance(std::span<const std::size_t> peaks, std::span<const double> prom,
                                            int d_min)
{
  const std::size_t n = peaks.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prom[a] > prom[b]; });
  std::vector<bool> keep(n, true);
  const auto d = static_cast<std::size_t>(std::max(d_min, 0));
  for (std::size_t j : order) {
    if (!keep[j]) continue;
    for (std::size_t k = j; k-- > 0 && peaks[j] - peaks[k] < d;) keep[k] = false;
    for (std::size_t k = j + 1; k < n && peaks[k] - peaks[j] < d; ++k) keep[k] = false;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

namespace
{

void find_one_side(std::span<const double> x, const PeakParams & params, std::vector<std::size_t> & idx,
                   std::vector<double> & prom)
{
  const auto candidates = local_maxima(x);
  const auto all_prom = prominences(x, candidates);
  std::vector<std::size_t> retained;
  std::vector<double> retained_prom;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (all_prom[i] >= params.p_min) {
      retained.push_back(candidates[i]);
      retained_prom.push_back(all_prom[i]);
    }
  }
  for (std::size_t k : select_by_distance(retained, retained_prom, params.d_min)) {
    idx.push_back(retained[k]);
    prom.push_back(retained_prom[k]);
  }
}

}  // namespace

PeakSet find_peaks(std::span<const double> x, const PeakParams & params)
{
  if (x.size() < 3) throw Error(Errc::too_short, fmt::format("peak search needs 3 samples, got {}", x.size()));
  PeakSet out;
  find_one_side(x, params, out.peaks, out.peak_prominences);
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  find_one_side(neg, params, out.valleys, out.valley_prominences);
  return out;
}

std::vector<CycleRecord> pair_cycles(std::span<const std::size_t> valleys, std::span<const std::size_t> peaks,
                                     CycleKind kind)
{
  std::vector<CycleRecord> out;
  std::size_t p = 0;
  for (std::size_t k = 0; k + 1 < valleys.size(); ++k) {
    const std::size_t a = valleys[k];
    const std::size_t b = valleys[k + 1];
    while (p < peaks.size() && peaks[p] <= a) ++p;
    std::size_t inside = 0;
    for (std::size_t q = p; q < peaks.size() && peaks[q] < b; ++q) ++inside;
    const auto len = static_cast<int>(b - a + 1);
    if (inside != 1 || len < kMinCycleFrames || len > kMaxCycleFrames) continue;
    CycleRecord c;
    c.i_s = static_cast<FrameIndex>(a);
    c.i_e = static_cast<FrameIndex>(b);
    c.kind = kind;
    c.rep_index = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CycleRecord> segment_cycles(std::span<const double> series, const ExerciseConfig & config,
                                        const PeakParams & params)
{
  if (series.size() < 3) return {};
  const auto kind = config.cycle_mode == CycleMode::alternating ? CycleKind::alternating : CycleKind::repetitive;
  const auto ps = find_peaks(series, params);
  auto cycles = pair_cycles(ps.valleys, ps.peaks, kind);
  if (kind == CycleKind::alternating) {
    for (auto & c : cycles) c.phases = segment_phases(series, c);
  }
  return cycles;
}

std::vector<Phase> segment_phases(std::span<const double> series, const CycleRecord & cycle)
{
  if (cycle.i_s < 0 || cycle.i_e < cycle.i_s || cycle.i_e >= static_cast<FrameIndex>(series.size())) {
    throw Error(Errc::empty_cycle, "cycle outside the series");
  }
  const auto seg = series.subspan(cycle.i_s, cycle.length());
  const auto [lo, hi] = std::minmax_element(seg.begin(), seg.end());
  if (*lo == *hi) throw Error(Errc::degenerate_cycle, "signal is constant within the cycle");
  const double mean = kernels::sum(seg) / static_cast<double>(seg.size());

  struct Run
  {
    FrameIndex start;
    FrameIndex end;
    bool positive;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const bool pos = seg[i] - mean >= 0.0;
    const FrameIndex t = cycle.i_s + static_cast<FrameIndex>(i);
    if (runs.empty() || runs.back().positive != pos) {
      runs.push_back({t, t, pos});
    } else {
      runs.back().end = t;
    }
  }
  const auto len = [](const Run & r) { return r.end - r.start + 1; };
  if (runs.size() > 1 && len(runs.front()) < kPhaseSliver) {
    runs[1].start = runs.front().start;
    runs.erase(runs.begin());
  }
  if (runs.size() > 1 && len(runs.back()) < kPhaseSliver) {
    runs[runs.size() - 2].end = runs.back().end;
    runs.pop_back();
  }
  std::vector<Phase> phases;
  for (const auto & r : runs) phases.push_back({r.start, r.end, r.positive ? Side::right : Side::left});
  return phases;
}

std::vector<double> rolling_std(std::span<const double> x, int w)
{
  if (w < 1 || x.size() < static_cast<std::size_t>(w)) {
    throw Error(Errc::too_short, fmt::format("rolling window {} longer than series ({})", w, x.size()));
  }
  std::vector<double> out;
  out.reserve(x.size() - w + 1);
  for (std::size_t k = w - 1; k < x.size(); ++k) {
    const auto win = x.subspan(k + 1 - w, w);
    const double mean = kernels::sum(win) / w;
    out.push_back(std::sqrt(kernels::sum_sq_dev(win, mean) / w));
  }
  return out;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty()) throw Error(Errc::empty_series, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<CycleRecord> detect_static_hold(std::span<const double> series)
{
  const auto stds = rolling_std(series, kHoldWindow);
  const double eps = percentile(stds, kHoldPercentile);
  std::vector<CycleRecord> out;
  const auto emit = [&](std::size_t first, std::size_t last) {
    if (last - first + 1 < static_cast<std::size_t>(kHoldMinRun)) return;
    CycleRecord c;
    c.i_s = static_cast<FrameIndex>(first + kHoldWindow - 1);
    c.i_e = static_cast<FrameIndex>(last + kHoldWindow - 1);
    c.kind = CycleKind::static_hold;
    c.rep_index = static_cast<int>(out.size()) + 1;
    out.push_back(c);
  };
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::size_t start = none;
  for (std::size_t k = 0; k < stds.size(); ++k) {
    if (stds[k] <= eps) {
      if (start == none) start = k;
    } else if (start != none) {
      emit(start, k - 1);
      start = none;
    }
  }
  if (start != none) emit(start, stds.size() - 1);
  return out;
}

std::vector<CycleRecord> detect_cycles(std::span<const double> series, const ExerciseConfig & config)
{
  if (config.cycle_mode == CycleMode::static_hold) return detect_static_hold(series);
  return segment_cycles(series, config);
}

}  // namespace kincoach
