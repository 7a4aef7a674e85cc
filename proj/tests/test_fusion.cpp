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

#include "kincoach/error.hpp"
#include "kincoach/fusion.hpp"
#include "kincoach/random.hpp"

using namespace kincoach;

namespace
{

Matrix rand_m(Rng & rng, std::size_t r, std::size_t c, double s = 1.0)
{
  Matrix m(r, c);
  for (double & v : m.data()) v = rng.normal(0, s);
  return m;
}

CrossAttnBlock rand_block(Rng & rng, int d, int h, double s = 0.5)
{
  return {h, rand_m(rng, d, d, s), rand_m(rng, d, d, s), rand_m(rng, d, d, s), rand_m(rng, d, d, s)};
}

// Explicit loops: per head a, scores over context, softmax, weighted values, then W_O.
Matrix attend_oracle(const Matrix & f, const Matrix & m, const CrossAttnBlock & b)
{
  const std::size_t d = f.cols(), nv = f.rows(), nm = m.rows();
  const std::size_t dk = d / b.heads;
  const auto proj = [&](const Matrix & x, const Matrix & w) {
    Matrix out(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) out(i, j) += x(i, k) * w(k, j);
    return out;
  };
  const Matrix q = proj(f, b.wq), k = proj(m, b.wk), v = proj(m, b.wv);
  Matrix cat(nv, d);
  for (int a = 0; a < b.heads; ++a) {
    for (std::size_t i = 0; i < nv; ++i) {
      std::vector<double> s(nm);
      double mx = -1e300;
      for (std::size_t j = 0; j < nm; ++j) {
        for (std::size_t c = a * dk; c < (a + 1) * dk; ++c) s[j] += q(i, c) * k(j, c);
        s[j] /= std::sqrt(static_cast<double>(d));
        mx = std::max(mx, s[j]);
      }
      double z = 0;
      for (double & x : s) z += (x = std::exp(x - mx));
      for (std::size_t j = 0; j < nm; ++j)
        for (std::size_t c = a * dk; c < (a + 1) * dk; ++c) cat(i, c) += s[j] / z * v(j, c);
    }
  }
  Matrix out = proj(cat, b.wo);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) += f(i, j);
  return out;
}

double plain_ce(const Matrix & logits, const std::vector<int> & targets, const std::vector<double> & w)
{
  double total = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double mx = -1e300;
    for (std::size_t c = 0; c < logits.cols(); ++c) mx = std::max(mx, logits(t, c));
    double z = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(logits(t, c) - mx);
    total += w[t] * (std::log(z) + mx - logits(t, targets[t]));
  }
  return total;
}

void expect_close(const Matrix & a, const Matrix & b, double tol)
{
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], tol);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST(Attention, MatchesLoopOracle)
{
  Rng rng(1);
  for (int h : {1, 2}) {
    const auto b = rand_block(rng, 4, h);
    const auto f = rand_m(rng, 3, 4);
    const auto m = rand_m(rng, 2, 4);
    expect_close(cross_attend(f, m, b), attend_oracle(f, m, b), 1e-12);
  }
  const auto b = rand_block(rng, 8, 4);
  const auto f = rand_m(rng, 5, 8);
  const auto m = rand_m(rng, 6, 8);
  expect_close(cross_attend(f, m, b), attend_oracle(f, m, b), 1e-12);
}

TEST(Attention, SingleContextToken)
{
  Rng rng(2);
  const auto b = rand_block(rng, 4, 2);
  const auto f = rand_m(rng, 3, 4);
  const auto m = rand_m(rng, 1, 4);
  AttnCache cache;
  const auto z = cross_attend(f, m, b, &cache);
  const auto mv = matmul(matmul(m, b.wv), b.wo);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(z(i, j), f(i, j) + mv(0, j), 1e-12);
  for (const auto & p : cache.probs)
    for (double v : p.data()) EXPECT_EQ(v, 1.0);
}

TEST(Attention, ZeroValuesPassThrough)
{
  Rng rng(3);
  auto b = rand_block(rng, 8, 2);
  b.wv = Matrix(8, 8);
  const auto f = rand_m(rng, 4, 8);
  EXPECT_EQ(cross_attend(f, rand_m(rng, 3, 8), b), f);
}

TEST(Attention, RowsSumToOneAndPermutationInvariant)
{
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = rand_block(rng, 8, 2, 1.0);
    const auto f = rand_m(rng, 5, 8);
    const auto m = rand_m(rng, 4, 8);
    AttnCache cache;
    const auto z = cross_attend(f, m, b, &cache);
    for (const auto & p : cache.probs) {
      for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = 0;
        for (double v : p.row(r)) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
    Matrix perm(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto src = m.row((r + 1) % m.rows());
      std::copy(src.begin(), src.end(), perm.row(r).begin());
    }
    expect_close(cross_attend(f, perm, b), z, 1e-12);
  }
}

TEST(Attention, ShapeErrors)
{
  Rng rng(5);
  const auto b = rand_block(rng, 4, 1);
  EXPECT_THROW(cross_attend(rand_m(rng, 2, 3), rand_m(rng, 2, 4), b), Error);
  EXPECT_THROW(cross_attend(rand_m(rng, 2, 4), Matrix(0, 4), b), Error);
  EXPECT_THROW(CrossAttnBlock::init(6, 4, rng), Error);
}

TEST(Attention, InitScale)
{
  Rng rng(6);
  const auto b = CrossAttnBlock::init(32, 4, rng);
  const double limit = kAttnInitGain * std::sqrt(6.0 / 64.0);
  for (const Matrix * w : {&b.wq, &b.wk, &b.wv, &b.wo}) {
    EXPECT_EQ(w->rows(), 32u);
    for (double v : w->data()) EXPECT_LE(std::abs(v), limit);
  }
}

TEST(Attention, BackwardMatchesFiniteDifferences)
{
  Rng rng(7);
  auto b = rand_block(rng, 4, 2, 0.7);
  auto f = rand_m(rng, 3, 4);
  auto m = rand_m(rng, 2, 4);
  const auto dz = rand_m(rng, 3, 4);
  const auto objective = [&] {
    const auto z = cross_attend(f, m, b);
    double s = 0;
    for (std::size_t i = 0; i < z.data().size(); ++i) s += z.data()[i] * dz.data()[i];
    return s;
  };
  AttnCache cache;
  cross_attend(f, m, b, &cache);
  const auto g = cross_attend_backward(f, m, b, cache, dz);
  const double h = 1e-6;
  const auto check = [&](Matrix & p, const Matrix & grad) {
    for (int k = 0; k < 5; ++k) {
      double & x = p.data()[rng.below(p.data().size())];
      const std::size_t idx = &x - p.data().data();
      const double keep = x;
      x = keep + h;
      const double up = objective();
      x = keep - h;
      const double down = objective();
      x = keep;
      EXPECT_LE(rel_err((up - down) / (2 * h), grad.data()[idx]), 1e-4);
    }
  };
  check(b.wq, g.wq);
  check(b.wk, g.wk);
  check(b.wv, g.wv);
  check(b.wo, g.wo);
  check(f, g.dqueries);
  check(m, g.dcontext);
}

TEST(WeightedCe, AlphaOneIsPlainCe)
{
  Rng rng(8);
  const auto logits = rand_m(rng, 6, 5, 2.0);
  const std::vector<int> targets{0, 1, 2, 1, 4, 1};
  std::vector<bool> cont(5, false);
  cont[1] = true;
  const auto r = weighted_ce(logits, targets, cont, 1.0);
  EXPECT_NEAR(r.loss, plain_ce(logits, targets, std::vector<double>(6, 1.0)), 1e-12);
}

TEST(WeightedCe, AllContinuationScalesByAlpha)
{
  Rng rng(9);
  const auto logits = rand_m(rng, 7, 4, 2.0);
  const std::vector<int> targets(7, 1);
  std::vector<bool> cont(4, false);
  cont[1] = true;
  const double full = weighted_ce(logits, targets, cont, 1.0).loss;
  EXPECT_NEAR(weighted_ce(logits, targets, cont, 0.1).loss, 0.1 * full, 1e-12);
  EXPECT_NEAR(weighted_ce(logits, targets, cont, 0.1).loss, 0.1 * plain_ce(logits, targets, std::vector<double>(7, 1)),
              1e-12);
}

TEST(WeightedCe, MixedWeightsAndGradient)
{
  Rng rng(10);
  auto logits = rand_m(rng, 5, 6);
  const std::vector<int> targets{1, 2, 1, 5, 0};
  std::vector<bool> cont(6, false);
  cont[1] = true;
  const std::vector<double> w{0.1, 1, 0.1, 1, 1};
  const auto r = weighted_ce(logits, targets, cont, 0.1);
  EXPECT_NEAR(r.loss, plain_ce(logits, targets, w), 1e-12);
  const double h = 1e-6;
  for (std::size_t i = 0; i < logits.data().size(); ++i) {
    const double keep = logits.data()[i];
    logits.data()[i] = keep + h;
    const double up = weighted_ce(logits, targets, cont, 0.1).loss;
    logits.data()[i] = keep - h;
    const double down = weighted_ce(logits, targets, cont, 0.1).loss;
    logits.data()[i] = keep;
    EXPECT_NEAR((up - down) / (2 * h), r.dlogits.data()[i], 1e-7);
  }
}

TEST(WeightedCe, Errors)
{
  const Matrix logits(2, 3);
  const std::vector<bool> cont(3, false);
  const std::vector<int> bad{0, 3};
  try {
    weighted_ce(logits, bad, cont, 0.1);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), Errc::bad_target);
  }
  const std::vector<int> ok{0, 1};
  EXPECT_THROW(weighted_ce(logits, ok, cont, 0.0), Error);
  EXPECT_THROW(weighted_ce(logits, ok, cont, 1.5), Error);
}

TEST(FusionModel, GradientCheck)
{
  Rng rng(11);
  const auto vocab = toy_vocab(4);
  FusionModel model(vocab, 8, 2, 3);
  // Larger projections than the init so attention gradients are not vanishingly small.
  for (Matrix * w : {&model.params().wq, &model.params().wk, &model.params().wv, &model.params().wo}) {
    for (double & v : w->data()) v = rng.normal(0, 0.5);
  }
  CopyTaskOptions opt;
  opt.dim = 8;
  opt.n_v = 3;
  opt.n_m = 3;
  auto samples = make_copy_task(4, rng, vocab, opt);
  samples[0].text = {kTokBos, kTokFeedback, kTokNext, 5};
  for (const auto & s : samples) {
    auto grads = FusionParams::zeros_like(model.params());
    model.loss(s, 0.1, &grads);
    std::vector<double> flat;
    for (auto v : grads.views()) flat.insert(flat.end(), v.begin(), v.end());
    ASSERT_EQ(flat.size(), model.parameter_count());
    const double h = 1e-6;
    int checked = 0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      double & p = model.parameter(i);
      const double keep = p;
      p = keep + h;
      const double up = model.loss(s, 0.1);
      p = keep - h;
      const double down = model.loss(s, 0.1);
      p = keep;
      const double fd = (up - down) / (2 * h);
      if (std::abs(fd) < 1e-6 && std::abs(flat[i]) < 1e-6) continue;
      EXPECT_LE(rel_err(fd, flat[i]), 1e-4) << "param " << i;
      ++checked;
    }
    EXPECT_GT(checked, 50);
  }
}

TEST(FusionModel, CheckpointRoundTrip)
{
  FusionModel model(toy_vocab(), 16, 4, 9);
  const auto back = FusionModel::from_checkpoint(checkpoint_from_json(to_json(model.to_checkpoint())));
  EXPECT_EQ(back.vocab(), model.vocab());
  EXPECT_EQ(back.heads(), 4);
  EXPECT_EQ(back.params().embed, model.params().embed);
  EXPECT_EQ(back.params().wo, model.params().wo);
  auto wrong = model.to_checkpoint();
  wrong.kind = "salience";
  EXPECT_THROW(FusionModel::from_checkpoint(wrong), Error);
}

TEST(AdamW, FirstStepMatchesClosedForm)
{
  FusionModel model(toy_vocab(2), 4, 1, 1);
  auto params = model.params();
  auto grads = FusionParams::zeros_like(params);
  Rng rng(12);
  for (auto v : grads.views())
    for (double & x : v) x = rng.normal();
  const auto before = params;
  AdamW opt(params, 1e-3, 0.9, 0.999, 1e-8, 0.01);
  opt.step(params, grads);
  const auto p0 = before.views();
  const auto p1 = params.views();
  const auto g = grads.views();
  for (std::size_t k = 0; k < p1.size(); ++k) {
    for (std::size_t i = 0; i < p1[k].size(); ++i) {
      // Bias correction makes the first step g / (|g| + eps).
      const double want = p0[k][i] - 1e-3 * (g[k][i] / (std::abs(g[k][i]) + 1e-8) + 0.01 * p0[k][i]);
      EXPECT_NEAR(p1[k][i], want, 1e-12);
    }
  }
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Training, ZeroStepsIsInit)
{
  FusionTrainOptions o;
  o.steps = 0;
  o.seed = 5;
  o.train_size = 8;
  o.eval_size = 8;
  const auto r = train_fusion(o);
  const FusionModel fresh(toy_vocab(), o.task.dim, o.heads, 5);
  EXPECT_EQ(r.model.params().wq, fresh.params().wq);
  EXPECT_EQ(r.model.params().embed, fresh.params().embed);
  EXPECT_TRUE(r.loss_history.empty());
  o.train_size = 0;
  EXPECT_THROW(train_fusion(o), Error);
}

TEST(Training, CopyTaskLearned)
{
  FusionTrainOptions o;
  o.seed = 1;
  const auto r = train_fusion(o);
  EXPECT_GE(r.held_out.accuracy, 0.9);
  EXPECT_LT(r.held_out.mean_loss, r.initial.mean_loss);
  ASSERT_EQ(r.loss_history.size(), 300u);
}

TEST(Training, DownWeightingHelpsRareFeedbackEarly)
{
  double recall_low = 0, recall_full = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    FusionTrainOptions o;
    o.seed = seed;
    o.steps = 20;
    o.alpha = 0.1;
    recall_low += train_fusion(o).held_out.feedback_recall;
    o.alpha = 1.0;
    recall_full += train_fusion(o).held_out.feedback_recall;
  }
  EXPECT_GT(recall_low, recall_full);
}
