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

#include <cmath>
#include <numbers>

#include "kincoach/constraints.hpp"
#include "kincoach/error.hpp"
#include "kincoach/generator.hpp"
#include "kincoach/random.hpp"
#include "kincoach/reference.hpp"
#include "kincoach/skeleton.hpp"
#include "testing.hpp"

using namespace kincoach;
using kincoach::fixtures::bundled;

namespace
{

int joint(std::string_view id) { return SkeletonModel::get().joint_index(id); }

CycleRecord span(FrameIndex a, FrameIndex b)
{
  CycleRecord c;
  c.i_s = a;
  c.i_e = b;
  return c;
}

// Frames whose right knee rises to `peak_deg` mid-cycle.
Matrix knee_frames(double peak_deg, std::size_t n = 41)
{
  Matrix m(n, kNumDofs);
  const int knee = primary_dof("right_knee");
  for (std::size_t i = 0; i < n; ++i) {
    m(i, knee) = deg2rad(peak_deg * std::sin(std::numbers::pi * i / (n - 1)));
  }
  return m;
}

}  // namespace

TEST(Bounds, MatchesBruteForceCheck)
{
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double l = rng.uniform(-50, 150);
    double u = l + rng.uniform(0, 60);
    double d = rng.uniform(l - 30, u + 30);
    if (i % 5 == 0) d = l;
    if (i % 5 == 1) d = u;
    const Bound b{l, u};
    const bool outside = !(l <= d && d <= u);
    EXPECT_EQ(violates(d, b), outside);
    const double c = correction_for(d, b);
    EXPECT_EQ(c == 0.0, !outside);
    if (outside) { EXPECT_FALSE(violates(d + c, {l - 1e-9, u + 1e-9})); }
    // Widening never introduces a violation.
    const Bound wider{l - rng.uniform(0, 5), u + rng.uniform(0, 5)};
    if (!outside) { EXPECT_FALSE(violates(d, wider)); }
  }
}

TEST(Bounds, BoundaryPasses)
{
  EXPECT_FALSE(violates(5.0, {0.0, 5.0}));
  EXPECT_FALSE(violates(0.0, {0.0, 5.0}));
  EXPECT_TRUE(violates(5.0 + 1e-12, {0.0, 5.0}));
  EXPECT_DOUBLE_EQ(correction_for(85.0, {90.0, 140.0}), 5.0);
  EXPECT_DOUBLE_EQ(correction_for(150.0, {90.0, 140.0}), -10.0);
}

TEST(Static, ConstantIsZero)
{
  const std::vector<double> x(30, 0.3);
  const auto r = eval_static(joint("lumbar"), 17, span(0, 29), x);
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_FALSE(r.violated);
  EXPECT_EQ(r.bound, kDefaultStaticBound);
  EXPECT_EQ(r.cls, JointClass::static_joint);
}

TEST(Static, SquareWave)
{
  std::vector<double> x(40);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = deg2rad(i % 2 ? 4.0 : -4.0);
  const auto r = eval_static(joint("pelvis"), 0, span(0, 39), x);
  EXPECT_NEAR(r.delta, 16.0, 1e-9);
  EXPECT_FALSE(r.violated);
}

TEST(Static, TwelveDegreeWobbleViolates)
{
  std::vector<double> x(60);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = deg2rad(12.0 * std::sqrt(2.0) * std::sin(2 * std::numbers::pi * i / 20));
  const auto r = eval_static(joint("lumbar"), 17, span(0, 59), x);
  EXPECT_NEAR(std::sqrt(r.delta), 12.0, 1e-9);
  EXPECT_TRUE(r.violated);
  EXPECT_NEAR(r.correction, 25.0 - 144.0, 1e-6);
}

TEST(Static, OffsetInvariantAndVarianceOracle)
{
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = fixtures::random_series(rng, 50, -0.3, 0.3);
    const auto c = span(static_cast<FrameIndex>(rng.below(10)), 30 + static_cast<FrameIndex>(rng.below(20)));
    const auto a = eval_static(0, 0, c, x);
    double m = 0;
    for (FrameIndex i = c.i_s; i <= c.i_e; ++i) m += x[i] * 180.0 / std::numbers::pi;
    m /= c.length();
    double v = 0;
    for (FrameIndex i = c.i_s; i <= c.i_e; ++i) v += std::pow(x[i] * 180.0 / std::numbers::pi - m, 2);
    EXPECT_NEAR(a.delta, v / c.length(), 1e-9 * std::max(1.0, a.delta));
    const double off = rng.uniform(-1, 1);
    for (auto & s : x) s += off;
    EXPECT_NEAR(eval_static(0, 0, c, x).delta, a.delta, 1e-8 * std::max(1.0, a.delta));
  }
}

TEST(Static, EmptyCycleThrows)
{
  const std::vector<double> x(10, 0.0);
  try {
    eval_static(0, 0, span(5, 12), x);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::empty_cycle);
  }
}

TEST(KeyFrame, RulesAndTies)
{
  const std::vector<double> x{0, 3, 1, 3, -2, -2, 0};
  EXPECT_EQ(key_frame(x, 0, 6, KeyFrameRule::cycle_max), 1);
  EXPECT_EQ(key_frame(x, 2, 6, KeyFrameRule::cycle_max), 3);
  EXPECT_EQ(key_frame(x, 0, 6, KeyFrameRule::cycle_min), 4);
  EXPECT_THROW(key_frame(x, 5, 9, KeyFrameRule::cycle_min), Error);
  EXPECT_THROW(key_frame(x, 3, 2, KeyFrameRule::cycle_min), Error);
}

TEST(Dynamic, ShallowKneeNeedsFiveMoreDegrees)
{
  const auto cfg = bundled("squat");
  const auto * spec = cfg.constraint_for(joint("right_knee"));
  ASSERT_NE(spec, nullptr);
  const auto r = eval_dynamic(*spec, span(0, 40), knee_frames(85.0), nullptr, cfg);
  EXPECT_EQ(r.key_frame, 20);
  EXPECT_NEAR(r.delta, 85.0, 1e-9);
  EXPECT_TRUE(r.violated);
  EXPECT_NEAR(r.correction, 5.0, 1e-9);

  const auto ok = eval_dynamic(*spec, span(0, 40), knee_frames(100.0), nullptr, cfg);
  EXPECT_FALSE(ok.violated);
  EXPECT_EQ(ok.correction, 0.0);
}

TEST(Dynamic, DeviationAgainstReference)
{
  const auto cfg = bundled("squat");
  const auto ref = build_reference(cfg);
  const auto * spec = cfg.constraint_for(joint("right_hip"));
  ASSERT_NE(spec, nullptr);
  const auto whole = span(0, ref.length() - 1);
  const auto same = eval_dynamic(*spec, whole, ref.angles, &ref, cfg);
  EXPECT_EQ(same.delta, 0.0);
  EXPECT_FALSE(same.violated);

  // A shared offset on the hip leaves the deviation unchanged.
  const int hip = primary_dof("right_hip");
  auto user = ref.angles;
  auto shifted_ref = ref;
  for (std::size_t i = 0; i < user.rows(); ++i) {
    user(i, hip) += deg2rad(20.0);
    shifted_ref.angles(i, hip) += deg2rad(20.0);
  }
  EXPECT_NEAR(eval_dynamic(*spec, whole, user, &shifted_ref, cfg).delta, 0.0, 1e-9);
  const auto off = eval_dynamic(*spec, whole, user, &ref, cfg);
  EXPECT_NEAR(off.delta, 20.0, 1e-9);
  EXPECT_TRUE(off.violated);
  EXPECT_NEAR(off.correction, -5.0, 1e-9);

  EXPECT_THROW(eval_dynamic(*spec, whole, user, nullptr, cfg), Error);
}

TEST(Evaluate, OrderAndDefaults)
{
  const auto cfg = bundled("squat");
  const auto ref = build_reference(cfg);
  const auto c = span(0, ref.length() - 1);
  const auto results = evaluate_cycle(cfg, cfg.salient_joints, c, ref.angles, &ref);
  ASSERT_EQ(results.size(), 10u);  // subtalar joints carry no constraint
  for (std::size_t k = 1; k < results.size(); ++k) EXPECT_LT(results[k - 1].joint, results[k].joint);
  for (const auto & r : results) {
    EXPECT_FALSE(r.violated) << SkeletonModel::get().joint(r.joint).id;
    if (r.joint == joint("thorax")) { EXPECT_EQ(r.bound, kDefaultStaticBound); }
  }

  auto hold = c;
  hold.kind = CycleKind::static_hold;
  for (const auto & r : evaluate_cycle(cfg, cfg.salient_joints, hold, ref.angles, &ref)) {
    EXPECT_EQ(r.cls, JointClass::static_joint);
  }
}

TEST(Evaluate, JsonShape)
{
  const auto cfg = bundled("squat");
  const auto r = eval_dynamic(*cfg.constraint_for(joint("right_knee")), span(0, 40), knee_frames(85.0), nullptr, cfg);
  const auto j = to_json(r);
  EXPECT_EQ(j["joint"], "right_knee");
  EXPECT_EQ(j["statistic"], "key_frame_angle");
  EXPECT_EQ(j["class"], "dynamic");
  EXPECT_EQ(j["key_frame"], 20);
  EXPECT_EQ(j["violated"], true);
}
