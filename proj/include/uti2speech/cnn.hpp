// Copyright 2026 The uti2speech Authors
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
#include <random>
#include <string>
#include <vector>

#include "uti2speech/common.hpp"
#include "uti2speech/mel.hpp"

namespace uti2speech {

enum class Activation : int32_t { kSwish = 0, kIdentity = 1 };

// conv(k,f0) conv(k,f1) pool conv(k,f2) conv(k,f3) pool fc out, hidden
// activations + inverted dropout on every hidden layer.
struct CnnArchitecture {
  int input_rows = 64;
  int input_cols = 128;
  int kernel = 13;
  std::array<int, 4> conv_filters = {30, 60, 90, 120};
  int fc_units = 1000;
  int output_dim = 80;
  Activation activation = Activation::kSwish;
  float dropout = 0.2f;

  int pooled_rows() const { return input_rows / 4; }
  int pooled_cols() const { return input_cols / 4; }
  int flat_dim() const { return pooled_rows() * pooled_cols() * conv_filters[3]; }
  void validate() const;
  bool operator==(const CnnArchitecture&) const = default;

  // The image-to-acoustics stack: 64x128 input, 13x13 kernels,
  // 30/60/90/120 filters, 1000 fully connected units.
  static CnnArchitecture standard(int output_dim);
};

namespace cnn_detail {

template <typename S>
struct LayerCache;

}  // namespace cnn_detail

template <typename S>
struct CnnModelT {
  CnnArchitecture arch;
  std::array<Matrix<S>, 4> conv_w;  // out_ch x (in_ch * k * k)
  std::array<std::vector<S>, 4> conv_b;
  Matrix<S> fc_w;  // fc_units x flat_dim
  std::vector<S> fc_b;
  Matrix<S> out_w;  // output_dim x fc_units
  std::vector<S> out_b;
  FeatureNormalizer target_norm;  // empty = identity
  FeatureNormalizer input_norm;   // empty = identity
  bool trained = false;

  explicit CnnModelT(const CnnArchitecture& a = CnnArchitecture{});
  void init_weights(uint64_t seed);

  // Eval-mode forward: deterministic, dropout disabled.
  std::vector<S> forward(const S* image) const;
  // Train-mode forward: inverted dropout driven by `rng`, activations
  // cached for backward.
  std::vector<S> forward_train(const S* image, std::mt19937_64& rng,
                               cnn_detail::LayerCache<S>& cache) const;
  // MSE gradients for every tensor; layout mirrors the model tensors.
  struct Gradients {
    std::array<Matrix<S>, 4> conv_w;
    std::array<std::vector<S>, 4> conv_b;
    Matrix<S> fc_w;
    std::vector<S> fc_b;
    Matrix<S> out_w;
    std::vector<S> out_b;
    void init(const CnnArchitecture& a);
    void accumulate(const Gradients& other, S scale);
  };
  void backward(const cnn_detail::LayerCache<S>& cache, const S* target,
                Gradients& grads) const;
  void sgd_step(const Gradients& grads, S learning_rate);

  size_t parameter_count() const;
};

using CnnModel = CnnModelT<float>;

struct TrainConfig {
  double learning_rate = 0.01;  // paper leaves this "manually chosen"
  int batch_size = 16;
  int max_epochs = 100;
  int patience = 3;
  uint64_t seed = 0;
};

// Patience rule shared by train() and the tests: stop once the validation
// loss has not improved for `patience` consecutive epochs; the weights of
// the best epoch are what survives.
struct EarlyStopper {
  int patience = 3;
  double best_loss = 0.0;
  int best_epoch = -1;  // 1-based
  int epochs_seen = 0;
  int epochs_since_best = 0;

  // Feed one epoch's validation loss; true = stop now.
  bool observe(double val_loss);
};

struct EpochStats {
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;     // 1-based epoch whose weights were restored
  int stopped_epoch = 0;  // last epoch that ran
};

// Plain SGD on MSE with per-epoch seeded shuffling and early stopping;
// weights are restored to the best-validation epoch. Throws "diverged"
// (naming the epoch) on non-finite loss.
TrainResult train(CnnModel& model, const MatF& train_x, const MatF& train_y,
                  const MatF& val_x, const MatF& val_y,
                  const TrainConfig& cfg);

// Eval-mode forward per row plus target denormalization. Row length must
// be arch.input_rows * arch.input_cols. Throws "refused" on an untrained
// model.
MatF predict_sequence(const CnnModel& model, const MatF& frames);

// "CNN1": magic, architecture block, normalizers, then tensors as LE
// float32 in declared order. Round trips bitwise.
void save_model(const std::string& path, const CnnModel& model);
CnnModel load_model(const std::string& path);

// Training log as "epoch\ttrain_mse\tval_mse" lines.
void write_training_log(const std::string& path,
                        const std::vector<EpochStats>& history);

}  // namespace uti2speech

#include "uti2speech/cnn_impl.hpp"
