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
#include <cstdlib>

#include "kincoach/common.hpp"
#include "kincoach/error.hpp"
#include "kincoach/matrix.hpp"
#include "kincoach/random.hpp"

using namespace kincoach;

TEST(Rng, SameSeedSameStream)
{
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformInUnitInterval)
{
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments)
{
  Rng rng(2);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.01);
}

TEST(Rng, SeedFromEnv)
{
  ::unsetenv("KINCOACH_SEED");
  EXPECT_EQ(seed_from_env(9), 9u);
  ::setenv("KINCOACH_SEED", "1234", 1);
  EXPECT_EQ(seed_from_env(9), 1234u);
  ::setenv("KINCOACH_SEED", "12x", 1);
  EXPECT_EQ(seed_from_env(9), 9u);
  ::unsetenv("KINCOACH_SEED");
}

TEST(Errors, ExitCodes)
{
  EXPECT_EQ(exit_code(Errc::invariant), 3);
  EXPECT_EQ(exit_code(Errc::out_of_band), 3);
  EXPECT_EQ(exit_code(Errc::schema), 2);
  EXPECT_EQ(exit_code(Errc::stream_format), 2);
  const Error e(Errc::bad_k, "k=0");
  EXPECT_EQ(e.code(), Errc::bad_k);
  EXPECT_STREQ(e.what(), "BadK: k=0");
}

TEST(Units, DegreeRadianRoundTrip)
{
  EXPECT_DOUBLE_EQ(deg2rad(180.0), std::numbers::pi);
  EXPECT_DOUBLE_EQ(rad2deg(deg2rad(37.5)), 37.5);
  EXPECT_DOUBLE_EQ(frames_to_seconds(45), 1.5);
}

TEST(Matrix, AppendAndColumns)
{
  Matrix m;
  const double r0[] = {1, 2, 3};
  const double r1[] = {4, 5, 6};
  m.append_row(r0);
  m.append_row(r1);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.column(1), (std::vector<double>{2, 5}));
}
