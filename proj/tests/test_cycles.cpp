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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kincoach/cycles.hpp"
#include "kincoach/error.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/generator.hpp"
#include "kincoach/preprocess.hpp"
#include "kincoach/random.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace kincoach;
using kincoach::fixtures::bundled;
using kincoach::fixtures::oracle_find;
using kincoach::fixtures::oracle_prominence;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> wavy(Rng & rng, std::size_t n)
{
  std::vector<double> x(n);
  const double p1 = rng.uniform(25, 120);
  const double p2 = rng.uniform(6, 30);
  const double a2 = rng.uniform(0, 0.4);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::sin(kTwoPi * i / p1) + a2 * std::sin(kTwoPi * i / p2 + 1.0) + rng.normal(0, 0.05);
  }
  return gaussian_smooth(x);
}

ExerciseConfig with_mode(CycleMode mode)
{
  auto cfg = bundled("squat");
  cfg.cycle_mode = mode;
  return cfg;
}

}  // namespace

TEST(Peaks, ShortSeriesThrows)
{
  const std::vector<double> x{1, 2};
  EXPECT_THROW(find_peaks(x), Error);
}

TEST(Peaks, FlatSeriesHasNothing)
{
  const std::vector<double> x(50, 0.3);
  const auto ps = find_peaks(x);
  EXPECT_TRUE(ps.peaks.empty());
  EXPECT_TRUE(ps.valleys.empty());
}

TEST(Peaks, SineExample)
{
  std::vector<double> x(300);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * i / 60.0);
  const auto ps = find_peaks(x);
  ASSERT_EQ(ps.peaks.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(ps.peaks[k], 15 + 60 * k);
    EXPECT_NEAR(ps.peak_prominences[k], oracle_prominence(x, ps.peaks[k]), 1e-9);
    EXPECT_NEAR(ps.peak_prominences[k], 2.0, 1e-9);
  }
  EXPECT_EQ(ps.valleys, (std::vector<std::size_t>{45, 105, 165, 225, 285}));
}

TEST(Peaks, CloseEqualPeaksKeepEarlier)
{
  std::vector<double> x(20, 0.0);
  x[8] = 0.5;
  x[11] = 0.5;
  const auto ps = find_peaks(x);
  EXPECT_EQ(ps.peaks, (std::vector<std::size_t>{8}));
  EXPECT_DOUBLE_EQ(ps.peak_prominences[0], 0.5);
}

TEST(Peaks, PlateauMidpointRoundsDown)
{
  const std::vector<double> x{0, 1, 1, 1, 1, 0, 0};
  EXPECT_EQ(local_maxima(x), (std::vector<std::size_t>{2}));
  const std::vector<double> edge{1, 1, 0, 2, 2};
  EXPECT_TRUE(local_maxima(edge).empty());
}

TEST(Peaks, ProminenceWithOneBoundedSide)
{
  // Peak at 2 sees a higher sample on the right only; base is the min between them.
  const std::vector<double> x{0.0, 0.2, 1.0, 0.4, 3.0, -2.0};
  EXPECT_DOUBLE_EQ(prominence(x, 2), 0.6);
  EXPECT_DOUBLE_EQ(prominence(x, 4), 5.0);
}

// Values frozen from scipy.signal.find_peaks(prominence=0.1, distance=5).
TEST(Peaks, MatchesFrozenReference)
{
  std::vector<double> s(160);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = 0.8 * std::sin(kTwoPi * i / 37) + 0.3 * std::sin(kTwoPi * i / 7) + 0.05 * std::cos(kTwoPi * i / 3.3);
  }
  s.front() = 3;
  s.back() = 3;
  const std::vector<std::size_t> peaks{3, 9, 16, 23, 30, 37, 44, 50, 57, 65, 72, 79, 86, 92, 99, 107, 115, 121, 127, 135,
                                       142, 149, 156};
  const std::vector<double> prom{0.20898705059571704, 0.8263559302856498,  0.26188294156045777, 0.17773721053335118,
                                 0.33928619256221682, 0.17040203712840424, 2.0227939340700907,  0.42434070014225433,
                                 0.21755595887864665, 0.46229547660168457, 0.22134418267900788, 0.42086595152536854,
                                 2.0744625163657004,  0.25072507428494906, 0.39761195288033951, 0.19813963329731366,
                                 0.32097367719896513, 2.1237333398988723,  0.20801928900068967, 0.20541378933815863,
                                 0.32583565460007902, 0.20016585455781727, 0.36786489452194426};
  const auto ps = find_peaks(s);
  ASSERT_EQ(ps.peaks, peaks);
  for (std::size_t k = 0; k < prom.size(); ++k) EXPECT_NEAR(ps.peak_prominences[k], prom[k], 1e-12);
}

TEST(Peaks, RandomSeriesMatchOracle)
{
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto x = wavy(rng, 300);
    if (trial % 4 == 0) {
      for (auto & v : x) v = std::round(v * 8) / 8;  // quantised: plateaus and ties
    }
    const auto ps = find_peaks(x);
    const auto want = oracle_find(x, kProminenceMin, kDistanceMin);
    ASSERT_EQ(ps.peaks, want.idx) << "trial " << trial;
    for (std::size_t k = 0; k < want.prom.size(); ++k) EXPECT_NEAR(ps.peak_prominences[k], want.prom[k], 1e-9);
    for (std::size_t k = 1; k < ps.peaks.size(); ++k) EXPECT_GE(ps.peaks[k] - ps.peaks[k - 1], 5u);
    for (double p : ps.peak_prominences) EXPECT_GE(p, kProminenceMin);
  }
}

TEST(Peaks, DualityAndShift)
{
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = wavy(rng, 250);
    std::vector<double> neg(x.size());
    std::vector<double> shifted(x.size());
    const double c = rng.uniform(-3, 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
      neg[i] = -x[i];
      shifted[i] = x[i] + c;
    }
    const auto a = find_peaks(x);
    const auto b = find_peaks(neg);
    EXPECT_EQ(a.valleys, b.peaks);
    EXPECT_EQ(a.peaks, b.valleys);
    const auto s = find_peaks(shifted);
    EXPECT_EQ(a.peaks, s.peaks);
    EXPECT_EQ(a.valleys, s.valleys);
  }
}

TEST(Cycles, GeneratedSquatRecoversReps)
{
  const auto cfg = bundled("squat");
  GeneratorOptions opt;
  opt.reps = 5;
  opt.seed = 3;
  const auto session = generate_session(cfg, opt);
  std::vector<double> rep(session.frames.size());
  for (std::size_t i = 0; i < rep.size(); ++i) rep[i] = session.frames[i].q[cfg.representative_dof()];
  const auto cycles = segment_cycles(gaussian_smooth(rep), cfg);
  ASSERT_EQ(cycles.size(), session.truth_cycles.size());
  ASSERT_EQ(cycles.size(), 5u);
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    EXPECT_LE(std::abs(cycles[k].i_s - session.truth_cycles[k].i_s), 4);
    EXPECT_LE(std::abs(cycles[k].i_e - session.truth_cycles[k].i_e), 4);
    EXPECT_EQ(cycles[k].rep_index, static_cast<int>(k) + 1);
    if (k > 0) { EXPECT_GE(cycles[k].i_s, cycles[k - 1].i_e); }
  }
}

TEST(Cycles, LengthBounds)
{
  const auto cfg = with_mode(CycleMode::repetitive);
  const auto one_rep = [&](int len) {
    std::vector<double> x;
    for (int i = 10; i > 0; --i) x.push_back(i / 10.0);
    for (int i = 0; i <= len; ++i) x.push_back(0.5 - 0.5 * std::cos(kTwoPi * i / len));
    for (int i = 1; i <= 10; ++i) x.push_back(i / 10.0);
    return segment_cycles(x, cfg);
  };
  EXPECT_TRUE(one_rep(17).empty());  // 18 frames valley to valley
  const auto ok = one_rep(23);
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_EQ(ok[0].length(), 24);
  EXPECT_EQ(one_rep(149).size(), 1u);
  EXPECT_TRUE(one_rep(150).empty());
}

TEST(Cycles, RampHasNoCycles)
{
  std::vector<double> x(200);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.01 * static_cast<double>(i);
  EXPECT_TRUE(segment_cycles(x, with_mode(CycleMode::repetitive)).empty());
}

TEST(Cycles, PairingNeedsExactlyOnePeak)
{
  const std::vector<std::size_t> valleys{0, 30, 70, 100};
  const std::vector<std::size_t> peaks{15, 40, 60, 85};
  const auto c = pair_cycles(valleys, peaks, CycleKind::repetitive);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].i_s, 0);
  EXPECT_EQ(c[1].i_s, 70);
  EXPECT_EQ(c[1].rep_index, 2);
}

TEST(Phases, AnalyticCrossings)
{
  CycleRecord c;
  c.i_s = 0;
  c.i_e = 59;
  std::vector<double> x(60);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * (i - 10.5) / 60.0);
  auto ph = segment_phases(x, c);
  ASSERT_EQ(ph.size(), 3u);
  EXPECT_EQ(ph[0], (Phase{0, 10, Side::left}));
  EXPECT_EQ(ph[1], (Phase{11, 40, Side::right}));
  EXPECT_EQ(ph[2], (Phase{41, 59, Side::left}));

  // Crossings at 1.5 and 31.5 leave a two-frame leading sliver that folds into the next phase.
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * (i - 1.5) / 60.0);
  ph = segment_phases(x, c);
  ASSERT_EQ(ph.size(), 2u);
  EXPECT_EQ(ph[0], (Phase{0, 31, Side::right}));
  EXPECT_EQ(ph[1], (Phase{32, 59, Side::left}));

  std::vector<double> lifted(x);
  for (auto & v : lifted) v += 0.5;
  EXPECT_EQ(segment_phases(lifted, c), ph);
}

TEST(Phases, ConstantIsDegenerate)
{
  const std::vector<double> x(40, 0.2);
  CycleRecord c;
  c.i_s = 2;
  c.i_e = 35;
  try {
    segment_phases(x, c);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::degenerate_cycle);
  }
}

TEST(Phases, AlternatingCyclesCarryPhases)
{
  Rng rng(4);
  const auto x = wavy(rng, 400);
  for (const auto & c : segment_cycles(x, with_mode(CycleMode::alternating))) {
    EXPECT_EQ(c.kind, CycleKind::alternating);
    ASSERT_FALSE(c.phases.empty());
    EXPECT_EQ(c.phases.front().start, c.i_s);
    EXPECT_EQ(c.phases.back().end, c.i_e);
    for (std::size_t k = 1; k < c.phases.size(); ++k) {
      EXPECT_EQ(c.phases[k].start, c.phases[k - 1].end + 1);
      EXPECT_NE(c.phases[k].side, c.phases[k - 1].side);
    }
  }
}

TEST(Holds, RollingStdAndPercentile)
{
  const std::vector<double> x{1, 1, 3, 3};
  const auto s = rolling_std(x, 2);
  EXPECT_EQ(s, (std::vector<double>{0, 1, 0}));
  EXPECT_THROW(rolling_std(x, 5), Error);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 30), 1.9);
  EXPECT_DOUBLE_EQ(percentile({5}, 30), 5);
}

TEST(Holds, ConstantSeriesIsOneHold)
{
  const std::vector<double> x(200, 0.4);
  const auto h = detect_static_hold(x);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].i_s, kHoldWindow - 1);
  EXPECT_EQ(h[0].i_e, 199);
  EXPECT_EQ(h[0].kind, CycleKind::static_hold);
  EXPECT_THROW(detect_static_hold(std::vector<double>(9, 0.0)), Error);
}

namespace
{

std::vector<std::pair<FrameIndex, FrameIndex>> oracle_holds(const std::vector<double> & x)
{
  const int w = 10;
  std::vector<double> sd;
  for (std::size_t k = w - 1; k < x.size(); ++k) {
    double m = 0;
    for (int j = 0; j < w; ++j) m += x[k - j];
    m /= w;
    double v = 0;
    for (int j = 0; j < w; ++j) v += (x[k - j] - m) * (x[k - j] - m);
    sd.push_back(std::sqrt(v / w));
  }
  auto sorted = sd;
  std::sort(sorted.begin(), sorted.end());
  const double pos = 0.3 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double eps = sorted[lo] + (sorted[std::min(lo + 1, sorted.size() - 1)] - sorted[lo]) * (pos - lo);
  std::vector<std::pair<FrameIndex, FrameIndex>> out;
  std::size_t k = 0;
  while (k < sd.size()) {
    if (sd[k] > eps) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < sd.size() && sd[e + 1] <= eps) ++e;
    if (e - k + 1 >= 10) out.emplace_back(static_cast<FrameIndex>(k + w - 1), static_cast<FrameIndex>(e + w - 1));
    k = e + 1;
  }
  return out;
}

std::vector<double> noise_with_plateau(std::uint64_t seed, std::size_t n, std::size_t at, std::size_t len, double level)
{
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto & v : x) v = rng.normal(0, 0.3);
  for (std::size_t i = at; i < at + len; ++i) x[i] = level;
  return x;
}

}  // namespace

TEST(Holds, PlateauInNoise)
{
  const auto x = noise_with_plateau(5, 300, 100, 60, 2.0);
  const auto want = oracle_holds(x);
  const auto got = detect_static_hold(x);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < got.size(); ++k) {
    EXPECT_EQ(got[k].i_s, want[k].first);
    EXPECT_EQ(got[k].i_e, want[k].second);
  }
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].i_s, 109);
  EXPECT_EQ(got[0].i_e, 159);
}

TEST(Holds, ShortQuietRunRejected)
{
  // 17 equal samples give 8 zero-deviation windows.
  const auto x = noise_with_plateau(6, 300, 120, 17, 2.0);
  for (const auto & h : detect_static_hold(x)) EXPECT_TRUE(h.i_e < 128 || h.i_s > 136);
  EXPECT_EQ(detect_static_hold(x).size(), oracle_holds(x).size());
}

TEST(Streaming, MatchesBatchAndIsCausal)
{
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mode = trial % 2 ? CycleMode::alternating : CycleMode::repetitive;
    const auto kind = trial % 2 ? CycleKind::alternating : CycleKind::repetitive;
    const auto x = wavy(rng, 300 + rng.below(400));
    StreamingCycleDetector det(kind);
    std::vector<CycleRecord> got;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (auto & c : det.push(x[i])) {
        EXPECT_LE(c.i_e, static_cast<FrameIndex>(i));
        got.push_back(std::move(c));
      }
    }
    for (auto & c : det.finish()) got.push_back(std::move(c));
    EXPECT_EQ(got, segment_cycles(x, with_mode(mode))) << "trial " << trial;
  }
}

TEST(Streaming, MostCyclesEmittedBeforeFinish)
{
  std::vector<double> x(600);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * i / 50.0);
  StreamingCycleDetector det(CycleKind::repetitive);
  std::size_t live = 0;
  for (double v : x) live += det.push(v).size();
  EXPECT_GE(live, 10u);
  EXPECT_EQ(live + det.finish().size(), segment_cycles(x, with_mode(CycleMode::repetitive)).size());
}

TEST(Streaming, HoldsOnConstantInput)
{
  StreamingHoldDetector det;
  std::vector<CycleRecord> got;
  for (int i = 0; i < 100; ++i) {
    for (auto & c : det.push(1.0)) got.push_back(c);
  }
  for (auto & c : det.finish()) got.push_back(c);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].i_s, 9);
  EXPECT_EQ(got[0].i_e, 99);
}
