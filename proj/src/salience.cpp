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

#include "kincoach/salience.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "json.hpp"
#include "kincoach/error.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/kernels.hpp"
#include "kincoach/random.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{

using nlohmann::json;

namespace
{

double sigmoid(double z)
{
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void add_bias(Matrix & z, const std::vector<double> & b)
{
  for (std::size_t r = 0; r < z.rows(); ++r) kernels::axpy(1.0, b, z.row(r));
}

constexpr std::array<std::pair<int, int>, kNumRegions> kRegions = {{
  {0, 3}, {3, 10}, {10, 17}, {17, 26}, {26, 36}, {36, 46},
}};

}  // namespace

JointSelection expand_joints(std::vector<int> joints)
{
  std::sort(joints.begin(), joints.end());
  joints.erase(std::unique(joints.begin(), joints.end()), joints.end());
  JointSelection sel;
  const auto & model = SkeletonModel::get();
  for (int j : joints) {
    const auto & info = model.joint(j);
    for (int d = 0; d < info.dof_count; ++d) sel.dofs.push_back(info.first_dof + d);
  }
  sel.joints = std::move(joints);
  return sel;
}

JointSelection select_topk(std::span<const double> scores, int k)
{
  if (scores.size() != static_cast<std::size_t>(kNumJoints)) {
    throw Error(Errc::dim_mismatch, fmt::format("expected {} joint scores, got {}", kNumJoints, scores.size()));
  }
  if (k < 1 || k > kNumJoints) throw Error(Errc::bad_k, fmt::format("K = {} outside [1, {}]", k, kNumJoints));
  std::vector<int> order(kNumJoints);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(k);
  return expand_joints(std::move(order));
}

BceResult bce_loss(std::span<const double> scores, std::span<const double> labels, double w_pos, double w_neg)
{
  if (scores.size() != static_cast<std::size_t>(kNumJoints) || labels.size() != scores.size()) {
    throw Error(Errc::dim_mismatch, "bce_loss expects 24 scores and 24 labels");
  }
  BceResult r;
  for (int j = 0; j < kNumJoints; ++j) {
    const double y = labels[j];
    const double w = y > 0.5 ? w_pos : w_neg;
    const double s = std::clamp(scores[j], kBceEps, 1.0 - kBceEps);
    r.loss -= w * (y * std::log(s) + (1.0 - y) * std::log(1.0 - s));
    const bool clamped = scores[j] < kBceEps || scores[j] > 1.0 - kBceEps;
    r.grad_logit[j] = clamped ? 0.0 : w * (scores[j] - y);
  }
  return r;
}

ClassWeights balanced_weights(const Matrix & labels)
{
  const double n = static_cast<double>(labels.data().size());
  double pos = 0.0;
  for (double y : labels.data()) pos += y > 0.5 ? 1.0 : 0.0;
  const double neg = n - pos;
  if (pos == 0.0 || neg == 0.0) return {};
  return {n / (2.0 * pos), n / (2.0 * neg)};
}

SalienceScorer::SalienceScorer(int input_dim, std::vector<int> hidden, double dropout) : dropout_(dropout)
{
  if (input_dim < 1) throw Error(Errc::dim_mismatch, "scorer input dimension must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw Error(Errc::schema, "dropout must be in [0, 1)");
  int prev = input_dim;
  hidden.push_back(kNumJoints);
  for (int width : hidden) {
    if (width < 1) throw Error(Errc::dim_mismatch, "layer widths must be positive");
    weights_.emplace_back(prev, width);
    biases_.emplace_back(width, 0.0);
    prev = width;
  }
}

SalienceScorer SalienceScorer::initialized(int input_dim, std::uint64_t seed, std::vector<int> hidden,
                                           double dropout)
{
  SalienceScorer s(input_dim, std::move(hidden), dropout);
  Rng rng(seed);
  for (std::size_t l = 0; l < s.weights_.size(); ++l) {
    auto & w = s.weights_[l];
    const bool output = l + 1 == s.weights_.size();
    const double fan_in = static_cast<double>(w.rows());
    const double fan_out = static_cast<double>(w.cols());
    const double limit = output ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    for (double & v : w.data()) v = rng.uniform(-limit, limit);
  }
  return s;
}

Matrix SalienceScorer::forward(const Matrix & features) const
{
  if (features.cols() != static_cast<std::size_t>(input_dim())) {
    throw Error(Errc::dim_mismatch,
                fmt::format("scorer expects {} features, got {}", input_dim(), features.cols()));
  }
  Matrix h = features;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = matmul(h, weights_[l]);
    add_bias(z, biases_[l]);
    const bool output = l + 1 == weights_.size();
    for (double & v : z.data()) v = output ? sigmoid(v) : std::max(v, 0.0);
    h = std::move(z);
  }
  return h;
}

JointScores SalienceScorer::score(std::span<const double> features) const
{
  Matrix x(0, 0);
  x.append_row(features);
  const Matrix s = forward(x);
  JointScores out{};
  std::copy(s.data().begin(), s.data().end(), out.begin());
  return out;
}

double SalienceScorer::loss(const Matrix & features, const Matrix & labels, ClassWeights cw, Gradients * grads,
                            Rng * dropout_rng) const
{
  if (features.cols() != static_cast<std::size_t>(input_dim()) || labels.cols() != kNumJoints ||
      labels.rows() != features.rows()) {
    throw Error(Errc::dim_mismatch, "scorer loss: feature/label shape mismatch");
  }
  const std::size_t n = features.rows();
  if (n == 0) throw Error(Errc::empty_dataset, "scorer loss on empty batch");
  const std::size_t layers = weights_.size();

  // acts[l] is the input to layer l; pre[l] the hidden pre-activation; mult[l] the dropout multiplier.
  std::vector<Matrix> acts{features};
  std::vector<Matrix> pre;
  std::vector<Matrix> mult;
  Matrix out;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = matmul(acts.back(), weights_[l]);
    add_bias(z, biases_[l]);
    if (l + 1 == layers) {
      out = z;
      for (double & v : out.data()) v = sigmoid(v);
      break;
    }
    Matrix a = z;
    Matrix m(z.rows(), z.cols(), 1.0);
    if (dropout_rng && dropout_ > 0.0) {
      const double keep = 1.0 - dropout_;
      for (double & v : m.data()) v = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
    for (std::size_t i = 0; i < a.data().size(); ++i) a.data()[i] = std::max(a.data()[i], 0.0) * m.data()[i];
    pre.push_back(std::move(z));
    mult.push_back(std::move(m));
    acts.push_back(std::move(a));
  }

  double total = 0.0;
  Matrix delta(n, kNumJoints);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto res = bce_loss(out.row(r), labels.row(r), cw.pos, cw.neg);
    total += res.loss;
    for (int j = 0; j < kNumJoints; ++j) delta(r, j) = res.grad_logit[j] * inv_n;
  }
  if (grads) {
    grads->weights.assign(layers, Matrix{});
    grads->biases.assign(layers, {});
    for (std::size_t l = layers; l-- > 0;) {
      grads->weights[l] = matmul_tn(acts[l], delta);
      auto & db = grads->biases[l];
      db.assign(delta.cols(), 0.0);
      for (std::size_t r = 0; r < n; ++r) kernels::axpy(1.0, delta.row(r), db);
      if (l == 0) break;
      Matrix back = matmul_nt(delta, weights_[l]);
      const auto & z = pre[l - 1];
      const auto & m = mult[l - 1];
      for (std::size_t i = 0; i < back.data().size(); ++i) {
        back.data()[i] = z.data()[i] > 0.0 ? back.data()[i] * m.data()[i] : 0.0;
      }
      delta = std::move(back);
    }
  }
  return total * inv_n;
}

std::size_t SalienceScorer::parameter_count() const
{
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].data().size() + biases_[l].size();
  return n;
}

double & SalienceScorer::parameter(std::size_t index)
{
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto & w = weights_[l].data();
    if (index < w.size()) return w[index];
    index -= w.size();
    if (index < biases_[l].size()) return biases_[l][index];
    index -= biases_[l].size();
  }
  throw Error(Errc::dim_mismatch, "parameter index out of range");
}

void SalienceScorer::apply_step(const Gradients & grads, double lr)
{
  if (lr == 0.0) return;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    kernels::axpy(-lr, grads.weights[l].data(), weights_[l].data());
    kernels::axpy(-lr, grads.biases[l], biases_[l]);
  }
}

Checkpoint SalienceScorer::to_checkpoint() const
{
  Checkpoint ckpt;
  ckpt.kind = "salience";
  json hidden = json::array();
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) hidden.push_back(weights_[l].cols());
  ckpt.meta = {{"input_dim", input_dim()}, {"hidden", hidden}, {"dropout", dropout_}};
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    ckpt.add(fmt::format("W{}", l), weights_[l]);
    Matrix b(0, 0);
    b.append_row(biases_[l]);
    ckpt.add(fmt::format("b{}", l), std::move(b));
  }
  return ckpt;
}

SalienceScorer SalienceScorer::from_checkpoint(const Checkpoint & ckpt)
{
  if (ckpt.kind != "salience") throw Error(Errc::schema, "checkpoint kind is not 'salience'");
  SalienceScorer s;
  try {
    s = SalienceScorer(ckpt.meta.at("input_dim").get<int>(), ckpt.meta.at("hidden").get<std::vector<int>>(),
                       ckpt.meta.value("dropout", 0.1));
  } catch (const json::exception & e) {
    throw Error(Errc::schema, std::string("salience checkpoint meta: ") + e.what());
  }
  for (std::size_t l = 0; l < s.weights_.size(); ++l) {
    const auto & w = ckpt.tensor(fmt::format("W{}", l));
    const auto & b = ckpt.tensor(fmt::format("b{}", l));
    if (w.rows() != s.weights_[l].rows() || w.cols() != s.weights_[l].cols() || b.rows() != 1 ||
        b.cols() != s.biases_[l].size()) {
      throw Error(Errc::dim_mismatch, fmt::format("salience checkpoint layer {} has the wrong shape", l));
    }
    s.weights_[l] = w;
    s.biases_[l] = b.data();
  }
  return s;
}

std::array<double, kNumRegions> region_rom(const Matrix & angles)
{
  std::array<double, kNumRegions> rom{};
  if (angles.rows() == 0) return rom;
  for (int r = 0; r < kNumRegions; ++r) {
    for (int d = kRegions[r].first; d < kRegions[r].second; ++d) {
      double lo = angles(0, d);
      double hi = lo;
      for (std::size_t i = 1; i < angles.rows(); ++i) {
        lo = std::min(lo, angles(i, d));
        hi = std::max(hi, angles(i, d));
      }
      rom[r] = std::max(rom[r], hi - lo);
    }
  }
  return rom;
}

std::vector<double> exercise_descriptor(std::span<const std::string> vocab, const std::string & exercise_id,
                                        const std::array<double, kNumRegions> & rom)
{
  std::vector<double> f(vocab.size() + kNumRegions, 0.0);
  for (std::size_t i = 0; i < vocab.size(); ++i) f[i] = vocab[i] == exercise_id ? 1.0 : 0.0;
  std::copy(rom.begin(), rom.end(), f.begin() + static_cast<std::ptrdiff_t>(vocab.size()));
  return f;
}

JointScores label_vector(const ExerciseConfig & config)
{
  JointScores y{};
  for (int j : config.salient_joints) y[j] = 1.0;
  return y;
}

SalienceDataset load_salience_dataset(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open salience dataset " + path.string());
  SalienceDataset data;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto doc = json::parse(line);
      if (!have_header) {
        data.vocab = doc.at("vocab").get<std::vector<std::string>>();
        have_header = true;
        continue;
      }
      const auto f = doc.at("features").get<std::vector<double>>();
      const auto y = doc.at("labels").get<std::vector<double>>();
      if (y.size() != static_cast<std::size_t>(kNumJoints)) throw Error(Errc::schema, "labels must have 24 entries");
      if (data.features.rows() > 0 && f.size() != data.features.cols()) {
        throw Error(Errc::dim_mismatch, "inconsistent feature dimension");
      }
      data.features.append_row(f);
      data.labels.append_row(y);
    } catch (const json::exception & e) {
      throw Error(Errc::schema, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const Error & e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (!have_header) throw Error(Errc::empty_dataset, path.string() + " has no vocab header");
  return data;
}

void save_salience_dataset(const SalienceDataset & data, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write salience dataset " + path.string());
  out << json{{"vocab", data.vocab}}.dump() << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto f = data.features.row(r);
    const auto y = data.labels.row(r);
    out << json{{"features", std::vector<double>(f.begin(), f.end())},
                {"labels", std::vector<double>(y.begin(), y.end())}}
             .dump()
        << '\n';
  }
}

std::vector<double> train_salience_epochs(SalienceScorer & scorer, const SalienceDataset & data, int epochs,
                                          double lr, Rng & rng)
{
  if (data.size() == 0) throw Error(Errc::empty_dataset, "salience dataset is empty");
  const ClassWeights cw = balanced_weights(data.labels);
  std::vector<double> history;
  SalienceScorer::Gradients grads;
  for (int e = 0; e < epochs; ++e) {
    history.push_back(scorer.loss(data.features, data.labels, cw, &grads, &rng));
    scorer.apply_step(grads, lr);
  }
  return history;
}

SalienceTrainResult train_salience(const SalienceDataset & data, const SalienceTrainOptions & options)
{
  if (data.size() == 0) throw Error(Errc::empty_dataset, "salience dataset is empty");
  SalienceTrainResult result;
  result.scorer = SalienceScorer::initialized(static_cast<int>(data.features.cols()), options.seed, options.hidden,
                                              options.dropout);
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  result.loss_history = train_salience_epochs(result.scorer, data, options.epochs, options.lr, rng);
  return result;
}

double per_joint_accuracy(const SalienceScorer & scorer, const SalienceDataset & data)
{
  if (data.size() == 0) throw Error(Errc::empty_dataset, "salience dataset is empty");
  const Matrix s = scorer.forward(data.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < s.data().size(); ++i) {
    hits += (s.data()[i] > 0.5) == (data.labels.data()[i] > 0.5) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(s.data().size());
}

SalienceModel SalienceModel::load(const std::filesystem::path & path)
{
  const auto ckpt = load_checkpoint(path);
  SalienceModel m;
  m.scorer = SalienceScorer::from_checkpoint(ckpt);
  try {
    m.vocab = ckpt.meta.at("vocab").get<std::vector<std::string>>();
  } catch (const json::exception & e) {
    throw Error(Errc::schema, std::string("salience checkpoint vocab: ") + e.what());
  }
  if (m.vocab.size() + kNumRegions != static_cast<std::size_t>(m.scorer.input_dim())) {
    throw Error(Errc::dim_mismatch, "salience checkpoint vocab does not match input dimension");
  }
  return m;
}

void SalienceModel::save(const std::filesystem::path & path) const
{
  auto ckpt = scorer.to_checkpoint();
  ckpt.meta["vocab"] = vocab;
  save_checkpoint(ckpt, path);
}

JointSelection SalienceModel::select(const std::string & exercise_id, const Matrix & ref_angles, int k) const
{
  const auto features = exercise_descriptor(vocab, exercise_id, region_rom(ref_angles));
  const auto scores = scorer.score(features);
  return select_topk(scores, k);
}

}  // namespace kincoach
