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
#include <numeric>

#include "kincoach/error.hpp"
#include "kincoach/preprocess.hpp"
#include "kincoach/random.hpp"
#include "testing.hpp"

using namespace kincoach;

namespace
{

AngleFrame frame_at(FrameIndex t, double v = 0.0, double conf = 1.0)
{
  AngleFrame f;
  f.t = t;
  f.q.fill(v);
  f.confidence = conf;
  return f;
}

// Direct convolution with explicit mirror padding, written independently of
// the library's reflect_index.
std::vector<double> oracle_smooth(const std::vector<double> & x, double sigma)
{
  const int r = static_cast<int>(4.0 * sigma + 0.5);
  std::vector<double> w;
  double total = 0;
  for (int j = -r; j <= r; ++j) {
    w.push_back(std::exp(-(j * j) / (2 * sigma * sigma)));
    total += w.back();
  }
  std::vector<double> padded;
  const int n = static_cast<int>(x.size());
  for (int i = -r; i < n + r; ++i) {
    int m = ((i % (2 * n)) + 2 * n) % (2 * n);
    padded.push_back(m < n ? x[m] : x[2 * n - 1 - m]);
  }
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = -r; j <= r; ++j) s += w[j + r] / total * padded[i + j + r];
    out[i] = s;
  }
  return out;
}

}  // namespace

TEST(Smoothing, KernelShape)
{
  EXPECT_EQ(kernel_radius(2.0), 8);
  const auto k = gaussian_kernel(2.0);
  ASSERT_EQ(k.size(), 17u);
  EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(k[j], k[16 - j]);
}

TEST(Smoothing, ReflectIndexMirrorsEdges)
{
  // d c b a | a b c d | d c b a
  EXPECT_EQ(reflect_index(-1, 4), 0u);
  EXPECT_EQ(reflect_index(-4, 4), 3u);
  EXPECT_EQ(reflect_index(4, 4), 3u);
  EXPECT_EQ(reflect_index(7, 4), 0u);
  EXPECT_EQ(reflect_index(8, 4), 0u);
  EXPECT_EQ(reflect_index(-3, 1), 0u);
}

// Frozen from scipy.ndimage.gaussian_filter1d(x, 2.0, mode="reflect", truncate=4.0).
TEST(Smoothing, MatchesFrozenReference)
{
  const std::vector<double> x = {0.0, -0.19447979333866044, -0.3953575266049646, 0.8733269096274833,
                                 0.5920390859672262, 0.24749498660405456, 1.3338476308781952, 0.8532093666488738,
                                 0.31546318055115097, 1.23737988023383, 0.6411200080598671, 0.052254305856751726,
                                 0.9974795567051479, 0.5022338408160261, 0.088424227586412, 1.272469882334903,
                                 1.0638353911641594, 0.9641853176722677, 2.467235512444012, 2.5593144574023623};
  const std::vector<double> expected = {
    -0.023191456402916276, 0.041989673743594746, 0.16655776856186472, 0.32828699960456431, 0.49193258615145197,
    0.62635563363473645,   0.71412828821382546,  0.75111174254866364, 0.74413132012778449, 0.70704677877672717,
    0.65786380460091232,   0.61815116882712418,  0.610407434399726,   0.65529291713061366, 0.77042906491225349,
    0.96590480775701526,   1.2361763422915959,   1.5497438533788979,  1.8402615101279496,  2.0188959822227139};
  const auto y = gaussian_smooth(x, 2.0);
  ASSERT_EQ(y.size(), expected.size());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-14) << i;
}

TEST(Smoothing, MatchesDirectConvolutionOracle)
{
  Rng rng(5);
  for (std::size_t n : {1u, 2u, 5u, 9u, 17u, 40u, 120u}) {
    const auto x = fixtures::random_series(rng, n);
    const auto y = gaussian_smooth(x, 2.0);
    const auto o = oracle_smooth(x, 2.0);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], o[i], 1e-13) << n << ":" << i;
  }
}

TEST(Smoothing, ConstantAndRamp)
{
  const std::vector<double> c(100, 5.0);
  for (double v : gaussian_smooth(c)) EXPECT_NEAR(v, 5.0, 1e-14);
  std::vector<double> ramp(100);
  for (int i = 0; i < 100; ++i) ramp[i] = 0.3 * i - 2;
  const auto y = gaussian_smooth(ramp);
  for (int i = 8; i < 92; ++i) EXPECT_NEAR(y[i], ramp[i], 1e-12);
}

TEST(Smoothing, ImpulseGivesKernel)
{
  std::vector<double> x(101, 0.0);
  x[50] = 1.0;
  const auto y = gaussian_smooth(x);
  const auto k = gaussian_kernel(2.0);
  for (int i = 0; i < 101; ++i) {
    const int j = i - 50;
    EXPECT_NEAR(y[i], std::abs(j) <= 8 ? k[j + 8] : 0.0, 1e-15);
  }
}

TEST(Smoothing, LinearityProperty)
{
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(80);
    const auto a = fixtures::random_series(rng, n);
    const auto b = fixtures::random_series(rng, n);
    const double alpha = rng.uniform(-3, 3), beta = rng.uniform(-3, 3);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = alpha * a[i] + beta * b[i];
    const auto sa = gaussian_smooth(a), sb = gaussian_smooth(b), sm = gaussian_smooth(mix);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(sm[i], alpha * sa[i] + beta * sb[i], 1e-10);
  }
}

TEST(Smoothing, EmptySeriesRejected)
{
  try {
    gaussian_smooth(std::vector<double>{});
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::empty_series);
  }
}

TEST(Window, GridAtNinety)
{
  EXPECT_EQ(window_grid(90), (std::vector<FrameIndex>{7, 15, 22, 30, 37, 45, 52, 60, 67, 75, 82, 90}));
}

TEST(Window, WarmupAtStart)
{
  std::vector<AngleFrame> s = {frame_at(0)};
  const auto w = make_window(s, 0);
  EXPECT_TRUE(w.warmup);
  ASSERT_EQ(w.frames.size(), 1u);
  EXPECT_EQ(w.frames[0].t, 0);
}

TEST(Window, FullHistoryNotWarmup)
{
  std::vector<AngleFrame> s;
  for (int t = 0; t <= 120; ++t) s.push_back(frame_at(t));
  EXPECT_FALSE(make_window(s, 90).warmup);
  EXPECT_TRUE(make_window(s, 89).warmup);
  const auto w = make_window(s, 120);
  ASSERT_EQ(w.frames.size(), 12u);
  for (std::size_t i = 1; i < w.frames.size(); ++i) {
    const auto gap = w.frames[i].t - w.frames[i - 1].t;
    EXPECT_GE(gap, 7);
    EXPECT_LE(gap, 8);
  }
}

TEST(Window, SharedBetaPoolsToItself)
{
  Shape b{};
  for (int i = 0; i < kNumShape; ++i) b[i] = 0.1 * i - 0.3;
  std::vector<AngleFrame> s;
  for (int t = 0; t < 100; ++t) {
    s.push_back(frame_at(t));
    s.back().beta = b;
  }
  const auto w = make_window(s, 99);
  ASSERT_TRUE(w.beta_bar.has_value());
  for (int i = 0; i < kNumShape; ++i) EXPECT_NEAR((*w.beta_bar)[i], b[i], 1e-15);
}

TEST(Window, CausalUnderExtension)
{
  Rng rng(8);
  std::vector<AngleFrame> s;
  for (int t = 0; t < 200; ++t) {
    s.push_back(frame_at(t, rng.uniform(-1, 1)));
    Shape b{};
    for (auto & v : b) v = rng.normal();
    s.back().beta = b;
  }
  for (FrameIndex t : {0, 5, 60, 90, 150}) {
    const std::span<const AngleFrame> prefix(s.data(), static_cast<std::size_t>(t + 1));
    const auto a = make_window(prefix, t);
    const auto b = make_window(s, t);
    ASSERT_EQ(a.frames.size(), b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i], b.frames[i]);
    EXPECT_EQ(a.beta_bar, b.beta_bar);
  }
}

TEST(Window, PoolingIgnoresOrder)
{
  Rng rng(9);
  std::vector<AngleFrame> frames;
  for (int i = 0; i < 12; ++i) {
    frames.push_back(frame_at(i));
    Shape b{};
    for (auto & v : b) v = rng.normal();
    if (i % 4 != 0) frames.back().beta = b;
  }
  const auto a = pool_shape(frames);
  std::reverse(frames.begin(), frames.end());
  std::rotate(frames.begin(), frames.begin() + 5, frames.end());
  const auto b = pool_shape(frames);
  for (int i = 0; i < kNumShape; ++i) EXPECT_NEAR((*a)[i], (*b)[i], 1e-14);
  std::vector<AngleFrame> none = {frame_at(0)};
  EXPECT_FALSE(pool_shape(none).has_value());
}

TEST(Morph, StubAtOriginAndUnitVector)
{
  const auto & stub = AffineMorphStub::bundled();
  Shape zero{};
  EXPECT_EQ(morphometrics_from_beta(zero), stub.base);
  Shape e1{};
  e1[0] = 1.0;
  const auto p = morphometrics_from_beta(e1);
  EXPECT_DOUBLE_EQ(p.height_m, stub.base.height_m + stub.m[0][0]);
  EXPECT_DOUBLE_EQ(p.mass_kg, stub.base.mass_kg + stub.m[1][0]);
  EXPECT_DOUBLE_EQ(p.chest_m, stub.base.chest_m + stub.m[2][0]);
  EXPECT_DOUBLE_EQ(p.waist_m, stub.base.waist_m + stub.m[3][0]);
  EXPECT_DOUBLE_EQ(p.hip_m, stub.base.hip_m + stub.m[4][0]);
}

TEST(Morph, OutOfBandRejected)
{
  Shape b{};
  b[0] = 20.0;  // +1.6 m
  try {
    morphometrics_from_beta(b);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::out_of_band);
  }
}

TEST(Morph, DirectProfileEchoes)
{
  const auto p = parse_morph_profile(
    nlohmann::json::parse(R"({"height_m":1.78,"mass_kg":73.22,"chest_m":1.00,"waist_m":0.83,"hip_m":0.98})"));
  EXPECT_EQ(p, (MorphometricProfile{1.78, 73.22, 1.00, 0.83, 0.98}));
}

TEST(Frames, ParseAndFormatRoundTrip)
{
  AngleFrame f = frame_at(12, 0.25, 0.75);
  Shape b{};
  b[3] = -0.5;
  f.beta = b;
  const auto back = parse_frame(format_frame(f), 1);
  EXPECT_EQ(back, f);
}

TEST(Frames, ErrorsCarryLineNumber)
{
  const auto expect_line = [](const std::string & text, std::size_t line) {
    try {
      parse_frame(text, line);
      FAIL() << text;
    } catch (const Error & e) {
      EXPECT_EQ(e.code(), Errc::stream_format);
      EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos) << e.what();
    }
  };
  expect_line("not json", 3);
  expect_line(R"({"t": 1, "q": [0, 0]})", 4);
  std::string big = R"({"t":0,"q":[4)";
  for (int i = 1; i < kNumDofs; ++i) big += ",0";
  big += "]}";
  expect_line(big, 5);  // |q| > pi
  std::string conf = R"({"t":0,"conf":1.5,"q":[0)";
  for (int i = 1; i < kNumDofs; ++i) conf += ",0";
  conf += "]}";
  expect_line(conf, 6);
}

TEST(StreamBuffer, FillsGapsByHoldingLastPose)
{
  StreamBuffer buf;
  EXPECT_EQ(buf.push(frame_at(0, 0.1)), 1u);
  EXPECT_EQ(buf.push(frame_at(4, 0.2)), 4u);
  ASSERT_EQ(buf.size(), 5u);
  for (int i = 1; i <= 3; ++i) {
    EXPECT_EQ(buf.frames()[i].t, i);
    EXPECT_TRUE(buf.held(i));
    EXPECT_DOUBLE_EQ(buf.frames()[i].q[0], 0.1);
  }
  EXPECT_FALSE(buf.held(4));
  ASSERT_EQ(buf.warnings().size(), 1u);
  EXPECT_EQ(buf.window_warnings(4), (std::vector<std::string>{"missing frames; holding last pose"}));
}

TEST(StreamBuffer, LowConfidenceHoldsLastValidPose)
{
  StreamBuffer buf(0.5);
  buf.push(frame_at(0, 0.1));
  buf.push(frame_at(1, 0.9, 0.2));
  EXPECT_DOUBLE_EQ(buf.frames()[1].q[0], 0.1);
  EXPECT_TRUE(buf.held(1));
  EXPECT_EQ(buf.window_warnings(1).size(), 1u);
}

TEST(StreamBuffer, RejectsNonAdvancingFrames)
{
  StreamBuffer buf;
  buf.push(frame_at(3));
  try {
    buf.push(frame_at(3));
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::stream_format);
  }
}
