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

#include "kincoach/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"
#include "kincoach/random.hpp"

namespace kincoach
{

namespace
{

void xavier(Matrix & m, Rng & rng, double gain)
{
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (double & v : m.data()) v = rng.uniform(-limit, limit);
}

void add_into(Matrix & acc, const Matrix & x) { kernels::axpy(1.0, x.data(), acc.data()); }

}  // namespace

CrossAttnBlock CrossAttnBlock::init(int dim, int heads, Rng & rng, double gain)
{
  if (dim < 1 || heads < 1 || dim % heads != 0) {
    throw Error(Errc::dim_mismatch, fmt::format("model dim {} not divisible into {} heads", dim, heads));
  }
  CrossAttnBlock b;
  b.heads = heads;
  for (Matrix * m : {&b.wq, &b.wk, &b.wv, &b.wo}) {
    *m = Matrix(dim, dim);
    xavier(*m, rng, gain);
  }
  return b;
}

Matrix cross_attend(const Matrix & queries, const Matrix & context, const CrossAttnBlock & block, AttnCache * cache)
{
  const std::size_t d = block.wq.rows();
  if (d == 0 || block.heads < 1 || d % static_cast<std::size_t>(block.heads) != 0) {
    throw Error(Errc::dim_mismatch, "attention heads must divide the model dim");
  }
  if (queries.cols() != d || context.cols() != d) {
    throw Error(Errc::dim_mismatch, fmt::format("attention inputs must have {} columns", d));
  }
  if (context.rows() == 0 || queries.rows() == 0) throw Error(Errc::dim_mismatch, "attention needs tokens");

  AttnCache local;
  AttnCache & c = cache ? *cache : local;
  c.q = matmul(queries, block.wq);
  c.k = matmul(context, block.wk);
  c.v = matmul(context, block.wv);
  c.concat = Matrix(queries.rows(), d);
  c.probs.assign(block.heads, Matrix(queries.rows(), context.rows()));

  const std::size_t dk = d / block.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int a = 0; a < block.heads; ++a) {
    const std::size_t off = a * dk;
    Matrix & p = c.probs[a];
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      const auto qi = c.q.row(i).subspan(off, dk);
      double mx = -INFINITY;
      for (std::size_t j = 0; j < context.rows(); ++j) {
        p(i, j) = scale * kernels::dot(qi, c.k.row(j).subspan(off, dk));
        mx = std::max(mx, p(i, j));
      }
      double total = 0.0;
      for (std::size_t j = 0; j < context.rows(); ++j) {
        p(i, j) = std::exp(p(i, j) - mx);
        total += p(i, j);
      }
      auto out = c.concat.row(i).subspan(off, dk);
      for (std::size_t j = 0; j < context.rows(); ++j) {
        p(i, j) /= total;
        kernels::axpy(p(i, j), c.v.row(j).subspan(off, dk), out);
      }
    }
  }
  Matrix z = matmul(c.concat, block.wo);
  add_into(z, queries);
  return z;
}

AttnGrads cross_attend_backward(const Matrix & queries, const Matrix & context, const CrossAttnBlock & block,
                                const AttnCache & cache, const Matrix & dz)
{
  const std::size_t d = block.wq.rows();
  const std::size_t nv = queries.rows();
  const std::size_t nm = context.rows();
  if (dz.rows() != nv || dz.cols() != d) throw Error(Errc::dim_mismatch, "attention gradient shape mismatch");

  AttnGrads g;
  g.wo = matmul_tn(cache.concat, dz);
  const Matrix dconcat = matmul_nt(dz, block.wo);
  Matrix dq(nv, d);
  Matrix dk_all(nm, d);
  Matrix dv(nm, d);

  const std::size_t dk = d / block.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> ds(nm);
  for (int a = 0; a < block.heads; ++a) {
    const std::size_t off = a * dk;
    const Matrix & p = cache.probs[a];
    for (std::size_t i = 0; i < nv; ++i) {
      const auto dci = dconcat.row(i).subspan(off, dk);
      double row = 0.0;
      for (std::size_t j = 0; j < nm; ++j) {
        ds[j] = kernels::dot(dci, cache.v.row(j).subspan(off, dk));
        row += ds[j] * p(i, j);
      }
      for (std::size_t j = 0; j < nm; ++j) {
        kernels::axpy(p(i, j), dci, dv.row(j).subspan(off, dk));
        const double s = p(i, j) * (ds[j] - row) * scale;
        kernels::axpy(s, cache.k.row(j).subspan(off, dk), dq.row(i).subspan(off, dk));
        kernels::axpy(s, cache.q.row(i).subspan(off, dk), dk_all.row(j).subspan(off, dk));
      }
    }
  }
  g.wq = matmul_tn(queries, dq);
  g.wk = matmul_tn(context, dk_all);
  g.wv = matmul_tn(context, dv);
  g.dqueries = matmul_nt(dq, block.wq);
  add_into(g.dqueries, dz);
  g.dcontext = matmul_nt(dk_all, block.wk);
  add_into(g.dcontext, matmul_nt(dv, block.wv));
  return g;
}

CeResult weighted_ce(const Matrix & logits, std::span<const int> targets, const std::vector<bool> & continuation,
                     double alpha)
{
  const std::size_t vocab = logits.cols();
  if (vocab < 2) throw Error(Errc::dim_mismatch, "vocabulary needs at least two tokens");
  if (targets.size() != logits.rows() || continuation.size() != vocab) {
    throw Error(Errc::dim_mismatch, "weighted_ce: targets or class map do not match logits");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::schema, "alpha must be in (0, 1]");
  CeResult r;
  r.dlogits = Matrix(logits.rows(), vocab);
  double cont_sum = 0.0;
  double other_sum = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const int y = targets[t];
    if (y < 0 || static_cast<std::size_t>(y) >= vocab) {
      throw Error(Errc::bad_target, fmt::format("target {} at position {} outside vocabulary of {}", y, t, vocab));
    }
    const auto row = logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    const double nll = lse - row[y];
    const bool cont = continuation[y];
    (cont ? cont_sum : other_sum) += nll;
    const double w = cont ? alpha : 1.0;
    for (std::size_t c = 0; c < vocab; ++c) r.dlogits(t, c) = w * std::exp(row[c] - lse);
    r.dlogits(t, y) -= w;
  }
  r.loss = alpha * cont_sum + other_sum;
  return r;
}

std::vector<std::string> toy_vocab(int extra_words)
{
  std::vector<std::string> v = {"<bos>", "<next>", "<feedback>", "<violation>", "<clear>"};
  for (int i = 0; i < extra_words; ++i) v.push_back(fmt::format("w{}", i));
  return v;
}

std::vector<std::span<double>> FusionParams::views()
{
  return {embed.data(), wq.data(), wk.data(), wv.data(), wo.data(), w_out.data(), b_out.data()};
}

std::vector<std::span<const double>> FusionParams::views() const
{
  return {embed.data(), wq.data(), wk.data(), wv.data(), wo.data(), w_out.data(), b_out.data()};
}

FusionParams FusionParams::zeros_like(const FusionParams & o)
{
  const auto z = [](const Matrix & m) { return Matrix(m.rows(), m.cols()); };
  return {z(o.embed), z(o.wq), z(o.wk), z(o.wv), z(o.wo), z(o.w_out), z(o.b_out)};
}

FusionModel::FusionModel(std::vector<std::string> vocab, int dim, int heads, std::uint64_t seed)
: vocab_(std::move(vocab)), heads_(heads)
{
  if (vocab_.size() < 2) throw Error(Errc::dim_mismatch, "vocabulary needs at least two tokens");
  Rng rng(seed);
  const auto block = CrossAttnBlock::init(dim, heads, rng);
  params_.wq = block.wq;
  params_.wk = block.wk;
  params_.wv = block.wv;
  params_.wo = block.wo;
  params_.embed = Matrix(vocab_.size(), dim);
  xavier(params_.embed, rng, 1.0);
  params_.w_out = Matrix(dim, vocab_.size());
  xavier(params_.w_out, rng, 1.0);
  params_.b_out = Matrix(1, vocab_.size());
}

CrossAttnBlock FusionModel::block() const { return {heads_, params_.wq, params_.wk, params_.wv, params_.wo}; }

namespace
{

struct Forward
{
  Matrix context;
  AttnCache cache;
  Matrix z;
  Matrix h;
  Matrix logits;
  std::vector<int> targets;
};

Forward run_forward(const FusionParams & p, const CrossAttnBlock & block, const FusionSample & s)
{
  const std::size_t vocab = p.embed.rows();
  const auto check = [vocab](int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw Error(Errc::bad_target, fmt::format("token id {} outside vocabulary of {}", id, vocab));
    }
  };
  if (s.text.size() < 2) throw Error(Errc::dim_mismatch, "text needs at least two tokens");
  Forward f;
  f.context = Matrix(0, 0);
  for (int id : s.context) {
    check(id);
    f.context.append_row(p.embed.row(id));
  }
  f.z = cross_attend(s.queries, f.context, block, &f.cache);
  std::vector<double> g(f.z.cols(), 0.0);
  for (std::size_t r = 0; r < f.z.rows(); ++r) kernels::axpy(1.0, f.z.row(r), g);
  for (double & v : g) v /= static_cast<double>(f.z.rows());

  f.h = Matrix(s.text.size() - 1, f.z.cols());
  for (std::size_t t = 0; t + 1 < s.text.size(); ++t) {
    check(s.text[t]);
    check(s.text[t + 1]);
    auto row = f.h.row(t);
    std::copy(g.begin(), g.end(), row.begin());
    kernels::axpy(1.0, p.embed.row(s.text[t]), row);
    f.targets.push_back(s.text[t + 1]);
  }
  f.logits = matmul(f.h, p.w_out);
  for (std::size_t t = 0; t < f.logits.rows(); ++t) kernels::axpy(1.0, p.b_out.row(0), f.logits.row(t));
  return f;
}

std::vector<bool> continuation_map(std::size_t vocab)
{
  std::vector<bool> cont(vocab, false);
  cont[kTokNext] = true;
  return cont;
}

}  // namespace

Matrix FusionModel::logits(const FusionSample & sample) const { return run_forward(params_, block(), sample).logits; }

double FusionModel::loss(const FusionSample & sample, double alpha, FusionParams * grads) const
{
  const auto blk = block();
  const Forward f = run_forward(params_, blk, sample);
  const CeResult ce = weighted_ce(f.logits, f.targets, continuation_map(vocab_.size()), alpha);
  if (!grads) return ce.loss;

  FusionParams & g = *grads;
  add_into(g.w_out, matmul_tn(f.h, ce.dlogits));
  for (std::size_t t = 0; t < ce.dlogits.rows(); ++t) kernels::axpy(1.0, ce.dlogits.row(t), g.b_out.row(0));
  const Matrix dh = matmul_nt(ce.dlogits, params_.w_out);
  std::vector<double> dg(dh.cols(), 0.0);
  for (std::size_t t = 0; t < dh.rows(); ++t) {
    kernels::axpy(1.0, dh.row(t), g.embed.row(sample.text[t]));
    kernels::axpy(1.0, dh.row(t), dg);
  }
  Matrix dz(f.z.rows(), f.z.cols());
  const double inv = 1.0 / static_cast<double>(f.z.rows());
  for (std::size_t r = 0; r < dz.rows(); ++r) kernels::axpy(inv, dg, dz.row(r));
  const AttnGrads ag = cross_attend_backward(sample.queries, f.context, blk, f.cache, dz);
  add_into(g.wq, ag.wq);
  add_into(g.wk, ag.wk);
  add_into(g.wv, ag.wv);
  add_into(g.wo, ag.wo);
  for (std::size_t j = 0; j < sample.context.size(); ++j) {
    kernels::axpy(1.0, ag.dcontext.row(j), g.embed.row(sample.context[j]));
  }
  return ce.loss;
}

int FusionModel::predict_first(const FusionSample & sample) const
{
  const Matrix l = logits(sample);
  const auto row = l.row(0);
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t FusionModel::parameter_count() const
{
  std::size_t n = 0;
  for (auto v : params_.views()) n += v.size();
  return n;
}

double & FusionModel::parameter(std::size_t index)
{
  for (auto v : params_.views()) {
    if (index < v.size()) return v[index];
    index -= v.size();
  }
  throw Error(Errc::dim_mismatch, "parameter index out of range");
}

Checkpoint FusionModel::to_checkpoint() const
{
  Checkpoint c;
  c.kind = "fusion";
  c.meta = {{"vocab", vocab_}, {"heads", heads_}, {"dim", dim()}};
  c.add("embed", params_.embed);
  c.add("W_Q", params_.wq);
  c.add("W_K", params_.wk);
  c.add("W_V", params_.wv);
  c.add("W_O", params_.wo);
  c.add("W_out", params_.w_out);
  c.add("b_out", params_.b_out);
  return c;
}

FusionModel FusionModel::from_checkpoint(const Checkpoint & ckpt)
{
  if (ckpt.kind != "fusion") throw Error(Errc::schema, "checkpoint kind is not 'fusion'");
  FusionModel m;
  try {
    m.vocab_ = ckpt.meta.at("vocab").get<std::vector<std::string>>();
    m.heads_ = ckpt.meta.at("heads").get<int>();
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::schema, std::string("fusion checkpoint meta: ") + e.what());
  }
  m.params_ = {ckpt.tensor("embed"), ckpt.tensor("W_Q"), ckpt.tensor("W_K"),  ckpt.tensor("W_V"),
               ckpt.tensor("W_O"),   ckpt.tensor("W_out"), ckpt.tensor("b_out")};
  const std::size_t d = m.params_.embed.cols();
  if (m.params_.embed.rows() != m.vocab_.size() || m.params_.wq.rows() != d || m.params_.w_out.cols() != m.vocab_.size()) {
    throw Error(Errc::dim_mismatch, "fusion checkpoint tensor shapes disagree");
  }
  return m;
}

AdamW::AdamW(const FusionParams & shape, double lr, double beta1, double beta2, double eps, double weight_decay)
: lr_(lr),
  beta1_(beta1),
  beta2_(beta2),
  eps_(eps),
  wd_(weight_decay),
  m_(FusionParams::zeros_like(shape)),
  v_(FusionParams::zeros_like(shape))
{
}

void AdamW::step(FusionParams & params, const FusionParams & grads)
{
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  auto p = params.views();
  const auto g = grads.views();
  auto m = m_.views();
  auto v = v_.views();
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = beta1_ * m[k][i] + (1.0 - beta1_) * g[k][i];
      v[k][i] = beta2_ * v[k][i] + (1.0 - beta2_) * g[k][i] * g[k][i];
      const double mhat = m[k][i] / c1;
      const double vhat = v[k][i] / c2;
      p[k][i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * p[k][i]);
    }
  }
}

std::vector<FusionSample> make_copy_task(int count, Rng & rng, const std::vector<std::string> & vocab,
                                         const CopyTaskOptions & o)
{
  const int first_word = kTokClear + 1;
  const int words = static_cast<int>(vocab.size()) - first_word;
  if (words < 1) throw Error(Errc::dim_mismatch, "copy task needs filler words in the vocabulary");
  if (o.n_m < 1 || o.n_v < 1) throw Error(Errc::dim_mismatch, "copy task needs query and context tokens");
  std::vector<FusionSample> out;
  for (int s = 0; s < count; ++s) {
    FusionSample x;
    x.queries = Matrix(o.n_v, o.dim);
    for (double & v : x.queries.data()) v = rng.normal();
    const bool feedback = rng.uniform() < o.feedback_rate;
    const auto flag_pos = static_cast<int>(rng.below(o.n_m));
    for (int j = 0; j < o.n_m; ++j) {
      x.context.push_back(j == flag_pos ? (feedback ? kTokViolation : kTokClear)
                                        : first_word + static_cast<int>(rng.below(words)));
    }
    x.text = {kTokBos, feedback ? kTokFeedback : kTokNext};
    out.push_back(std::move(x));
  }
  return out;
}

CopyTaskMetrics evaluate_copy_task(const FusionModel & model, std::span<const FusionSample> samples, double alpha)
{
  CopyTaskMetrics m;
  if (samples.empty()) return m;
  int correct = 0;
  int fb_total = 0;
  int fb_hit = 0;
  for (const auto & s : samples) {
    const int pred = model.predict_first(s);
    const int truth = s.text[1];
    correct += pred == truth ? 1 : 0;
    if (truth == kTokFeedback) {
      ++fb_total;
      fb_hit += pred == kTokFeedback ? 1 : 0;
    }
    m.mean_loss += model.loss(s, alpha);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  m.feedback_recall = fb_total ? static_cast<double>(fb_hit) / fb_total : 1.0;
  m.mean_loss /= static_cast<double>(samples.size());
  return m;
}

FusionTrainResult train_fusion(const FusionTrainOptions & o)
{
  if (o.train_size < 1 || o.batch < 1) throw Error(Errc::empty_dataset, "fusion training needs samples");
  const auto vocab = toy_vocab();
  Rng data_rng(o.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  const auto train = make_copy_task(o.train_size, data_rng, vocab, o.task);
  const auto held_out = make_copy_task(o.eval_size, data_rng, vocab, o.task);

  FusionTrainResult r;
  r.model = FusionModel(vocab, o.task.dim, o.heads, o.seed);
  r.initial = evaluate_copy_task(r.model, held_out, o.alpha);
  AdamW opt(r.model.params(), o.lr);
  Rng batch_rng(o.seed + 1);
  for (int step = 0; step < o.steps; ++step) {
    FusionParams grads = FusionParams::zeros_like(r.model.params());
    double total = 0.0;
    for (int b = 0; b < o.batch; ++b) {
      const auto & s = train[batch_rng.below(train.size())];
      total += r.model.loss(s, o.alpha, &grads);
    }
    const double inv = 1.0 / o.batch;
    for (auto v : grads.views()) {
      for (double & x : v) x *= inv;
    }
    opt.step(r.model.params(), grads);
    r.loss_history.push_back(total * inv);
  }
  r.held_out = evaluate_copy_task(r.model, held_out, o.alpha);
  return r;
}

}  // namespace kincoach
