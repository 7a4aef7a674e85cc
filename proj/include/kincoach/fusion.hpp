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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kincoach/checkpoint.hpp"
#include "kincoach/matrix.hpp"

namespace kincoach
{

class Rng;

inline constexpr double kAttnInitGain = 0.1;
inline constexpr double kContinuationWeight = 0.1;

/// Residual multi-head cross-attention, z = F + concat_a(softmax(Q_a K_a^T / sqrt(d)) V_a) W_O.
/// Heads are contiguous d/h column slices of the projections.
struct CrossAttnBlock
{
  int heads = 1;
  Matrix wq, wk, wv, wo;  // d x d each

  int dim() const { return static_cast<int>(wq.rows()); }

  // Xavier-uniform projections scaled by `gain`.
  static CrossAttnBlock init(int dim, int heads, Rng & rng, double gain = kAttnInitGain);
};

struct AttnCache
{
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, N_v x N_m
  Matrix concat;              // N_v x d, heads before W_O
};

// Throws DimMismatch.
Matrix cross_attend(const Matrix & queries, const Matrix & context, const CrossAttnBlock & block,
                    AttnCache * cache = nullptr);

struct AttnGrads
{
  Matrix wq, wk, wv, wo;
  Matrix dqueries, dcontext;
};

// Back-propagates dz = dL/dz through the block; needs the forward cache.
AttnGrads cross_attend_backward(const Matrix & queries, const Matrix & context, const CrossAttnBlock & block,
                                const AttnCache & cache, const Matrix & dz);

struct CeResult
{
  double loss = 0.0;
  Matrix dlogits;
};

// Row t of `logits` predicts targets[t]. loss = alpha * sum(NLL over continuation
// targets) + sum(NLL over the rest). Throws BadTarget.
CeResult weighted_ce(const Matrix & logits, std::span<const int> targets, const std::vector<bool> & continuation,
                     double alpha);

// --- toy conditioned decoder ------------------------------------------------

enum ToyToken : int {
  kTokBos = 0,
  kTokNext = 1,
  kTokFeedback = 2,
  kTokViolation = 3,
  kTokClear = 4,
};

std::vector<std::string> toy_vocab(int extra_words = 8);

struct FusionParams
{
  Matrix embed;  // V x d, shared by context and text tokens
  Matrix wq, wk, wv, wo;
  Matrix w_out;  // d x V
  Matrix b_out;  // 1 x V

  std::vector<std::span<double>> views();
  std::vector<std::span<const double>> views() const;
  static FusionParams zeros_like(const FusionParams & other);
};

struct FusionSample
{
  Matrix queries;            // N_v x d visual stand-ins
  std::vector<int> context;  // N_m token ids
  std::vector<int> text;     // x_0 .. x_{T-1}
};

/// Embeds the context, attends from the queries, pools the result into a
/// conditioning vector g, and predicts text[t + 1] from embed[text[t]] + g.
class FusionModel
{
public:
  FusionModel() = default;
  FusionModel(std::vector<std::string> vocab, int dim, int heads, std::uint64_t seed);

  const std::vector<std::string> & vocab() const { return vocab_; }
  int dim() const { return static_cast<int>(params_.embed.cols()); }
  int heads() const { return heads_; }
  FusionParams & params() { return params_; }
  const FusionParams & params() const { return params_; }
  CrossAttnBlock block() const;

  Matrix logits(const FusionSample & sample) const;
  double loss(const FusionSample & sample, double alpha, FusionParams * grads = nullptr) const;
  int predict_first(const FusionSample & sample) const;

  std::size_t parameter_count() const;
  double & parameter(std::size_t index);

  Checkpoint to_checkpoint() const;
  static FusionModel from_checkpoint(const Checkpoint & ckpt);

private:
  std::vector<std::string> vocab_;
  int heads_ = 1;
  FusionParams params_;
};

/// Adam with decoupled weight decay.
class AdamW
{
public:
  explicit AdamW(const FusionParams & shape, double lr = 2e-5, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8, double weight_decay = 0.01);
  void step(FusionParams & params, const FusionParams & grads);
  int steps() const { return t_; }

private:
  double lr_, beta1_, beta2_, eps_, wd_;
  FusionParams m_, v_;
  int t_ = 0;
};

struct CopyTaskOptions
{
  int n_v = 8;
  int n_m = 4;
  int dim = 32;
  double feedback_rate = 0.25;
};

// Context holds one <violation> or <clear> flag among filler words; the text is
// <bos> followed by <feedback> when a violation is present, else <next>.
std::vector<FusionSample> make_copy_task(int count, Rng & rng, const std::vector<std::string> & vocab,
                                         const CopyTaskOptions & options = {});

struct CopyTaskMetrics
{
  double accuracy = 0.0;
  double feedback_recall = 0.0;
  double mean_loss = 0.0;
};

CopyTaskMetrics evaluate_copy_task(const FusionModel & model, std::span<const FusionSample> samples, double alpha);

struct FusionTrainOptions
{
  int steps = 300;
  double lr = 1e-2;
  double alpha = kContinuationWeight;
  int batch = 8;
  int heads = 4;
  std::uint64_t seed = 0;
  int train_size = 512;
  int eval_size = 256;
  CopyTaskOptions task;
};

struct FusionTrainResult
{
  FusionModel model;
  std::vector<double> loss_history;  // mean batch loss per step
  CopyTaskMetrics initial;
  CopyTaskMetrics held_out;
};

// Throws EmptyDataset when train_size or batch is zero.
FusionTrainResult train_fusion(const FusionTrainOptions & options);

}  // namespace kincoach
