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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kincoach/checkpoint.hpp"
#include "kincoach/common.hpp"
#include "kincoach/matrix.hpp"

namespace kincoach
{

class Rng;
struct ExerciseConfig;

inline constexpr int kDefaultTopK = 12;
inline constexpr double kBceEps = 1e-7;
inline constexpr int kNumRegions = 6;

using JointScores = std::array<double, kNumJoints>;

struct JointSelection
{
  std::vector<int> joints;  // ascending joint index
  std::vector<int> dofs;    // ascending DoF index, union of the joints' blocks
};

// Ties go to the lower joint index. Throws BadK unless 1 <= k <= 24.
JointSelection select_topk(std::span<const double> scores, int k = kDefaultTopK);
JointSelection expand_joints(std::vector<int> joints);

struct BceResult
{
  double loss = 0.0;
  // d loss / d logit for each output unit.
  JointScores grad_logit{};
};

// sum_j w_j * BCE(clamp(s_j), y_j), with w_j = w_pos for positive labels and
// w_neg otherwise. The logit gradient is zero where the clamp is active.
BceResult bce_loss(std::span<const double> scores, std::span<const double> labels, double w_pos = 1.0,
                   double w_neg = 1.0);

struct ClassWeights
{
  double pos = 1.0;
  double neg = 1.0;
};

// Inverse-frequency weights over all label entries: N / (2 N_pos), N / (2 N_neg).
ClassWeights balanced_weights(const Matrix & labels);

/// in -> hidden... -> 24 perceptron, rectifier hidden layers, logistic output.
class SalienceScorer
{
public:
  SalienceScorer() = default;
  SalienceScorer(int input_dim, std::vector<int> hidden = {512, 256}, double dropout = 0.1);

  // He-uniform hidden layers, Xavier-uniform output layer, zero biases.
  static SalienceScorer initialized(int input_dim, std::uint64_t seed, std::vector<int> hidden = {512, 256},
                                    double dropout = 0.1);

  int input_dim() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().rows()); }
  std::size_t layer_count() const { return weights_.size(); }
  Matrix & weight(std::size_t layer) { return weights_[layer]; }
  const Matrix & weight(std::size_t layer) const { return weights_[layer]; }
  std::vector<double> & bias(std::size_t layer) { return biases_[layer]; }
  const std::vector<double> & bias(std::size_t layer) const { return biases_[layer]; }
  double dropout() const { return dropout_; }

  // Evaluation-mode forward pass. Throws DimMismatch.
  JointScores score(std::span<const double> features) const;
  Matrix forward(const Matrix & features) const;

  struct Gradients
  {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
  };

  // Mean over rows of the weighted BCE. Dropout is applied only when `dropout_rng` is given.
  double loss(const Matrix & features, const Matrix & labels, ClassWeights weights, Gradients * grads = nullptr,
              Rng * dropout_rng = nullptr) const;

  // Flat parameter view for optimizers and finite-difference checks.
  std::size_t parameter_count() const;
  double & parameter(std::size_t index);
  void apply_step(const Gradients & grads, double lr);

  Checkpoint to_checkpoint() const;
  static SalienceScorer from_checkpoint(const Checkpoint & ckpt);

  friend bool operator==(const SalienceScorer &, const SalienceScorer &) = default;

private:
  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;
  double dropout_ = 0.1;
};

// --- data -----------------------------------------------------------------

struct SalienceDataset
{
  std::vector<std::string> vocab;  // exercise ids in one-hot order
  Matrix features;
  Matrix labels;  // rows of 24 values in {0, 1}

  std::size_t size() const { return features.rows(); }
};

// Descriptor = one-hot(exercise) ++ per-region range of motion (radians) of a
// single-repetition trajectory. Regions: pelvis, right leg, left leg, spine,
// right arm, left arm.
std::array<double, kNumRegions> region_rom(const Matrix & angles);
std::vector<double> exercise_descriptor(std::span<const std::string> vocab, const std::string & exercise_id,
                                        const std::array<double, kNumRegions> & rom);

JointScores label_vector(const ExerciseConfig & config);

// JSON-Lines, one {"exercise":..,"features":[..],"labels":[24]} per sample,
// preceded by a {"vocab":[..]} header line.
SalienceDataset load_salience_dataset(const std::filesystem::path & path);
void save_salience_dataset(const SalienceDataset & data, const std::filesystem::path & path);

struct SalienceTrainOptions
{
  int epochs = 200;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {512, 256};
  double dropout = 0.1;
};

struct SalienceTrainResult
{
  SalienceScorer scorer;
  std::vector<double> loss_history;  // training loss before each epoch's step
};

// Full-batch gradient descent on the balanced BCE. Throws EmptyDataset.
SalienceTrainResult train_salience(const SalienceDataset & data, const SalienceTrainOptions & options);
// Continues training an existing scorer in place.
std::vector<double> train_salience_epochs(SalienceScorer & scorer, const SalienceDataset & data, int epochs,
                                          double lr, Rng & rng);

// Fraction of label entries where (score > 0.5) matches the label.
double per_joint_accuracy(const SalienceScorer & scorer, const SalienceDataset & data);

/// Trained scorer plus the vocabulary it was trained against.
struct SalienceModel
{
  SalienceScorer scorer;
  std::vector<std::string> vocab;

  static SalienceModel load(const std::filesystem::path & path);
  void save(const std::filesystem::path & path) const;
  JointSelection select(const std::string & exercise_id, const Matrix & ref_angles, int k = kDefaultTopK) const;
};

}  // namespace kincoach
