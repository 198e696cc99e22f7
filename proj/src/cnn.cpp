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

#include "uti2speech/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binio.hpp"

namespace uti2speech {

void CnnArchitecture::validate() const {
  require(input_rows >= 4 && input_cols >= 4 && input_rows % 4 == 0 &&
              input_cols % 4 == 0,
          "invalid-input", "input dims must be positive multiples of 4");
  require(kernel >= 1 && kernel % 2 == 1, "invalid-input",
          "kernel size must be odd");
  for (int f : conv_filters)
    require(f >= 1, "invalid-input", "conv filter counts must be positive");
  require(fc_units >= 1 && output_dim >= 1, "invalid-input",
          "layer widths must be positive");
  require(dropout >= 0.0f && dropout < 1.0f, "invalid-input",
          "dropout must be in [0, 1)");
}

CnnArchitecture CnnArchitecture::standard(int output_dim) {
  CnnArchitecture arch;
  arch.output_dim = output_dim;
  return arch;
}

bool EarlyStopper::observe(double val_loss) {
  ++epochs_seen;
  if (best_epoch < 0 || val_loss < best_loss) {
    best_loss = val_loss;
    best_epoch = epochs_seen;
    epochs_since_best = 0;
  } else {
    ++epochs_since_best;
  }
  return epochs_since_best >= patience;
}

namespace {

double eval_mse(const CnnModel& model, const MatF& x, const MatF& y) {
  double acc = 0.0;
  for (int r = 0; r < x.rows; ++r) {
    auto out = model.forward(x.row(r));
    double frame = 0.0;
    for (int d = 0; d < y.cols; ++d) {
      const double diff = out[d] - y.at(r, d);
      frame += diff * diff;
    }
    acc += frame / y.cols;
  }
  return acc / x.rows;
}

}  // namespace

TrainResult train(CnnModel& model, const MatF& train_x, const MatF& train_y,
                  const MatF& val_x, const MatF& val_y,
                  const TrainConfig& cfg) {
  require(train_x.rows >= 1 && val_x.rows >= 1, "invalid-input",
          "need nonempty train and validation sets");
  const int pixels = model.arch.input_rows * model.arch.input_cols;
  require(train_x.cols == pixels && val_x.cols == pixels, "invalid-input",
          "input width does not match the architecture");
  require(train_y.cols == model.arch.output_dim &&
              val_y.cols == model.arch.output_dim,
          "invalid-input", "target width does not match the architecture");
  require(train_x.rows == train_y.rows && val_x.rows == val_y.rows,
          "invalid-input", "input/target row counts differ");
  require(cfg.learning_rate > 0.0 && cfg.patience >= 1 && cfg.batch_size >= 1,
          "invalid-input", "bad training configuration");

  std::mt19937_64 rng(cfg.seed);
  const int n = train_x.rows;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  cnn_detail::LayerCache<float> cache;
  CnnModel::Gradients batch_grads, sample_grads;
  batch_grads.init(model.arch);
  sample_grads.init(model.arch);

  TrainResult result;
  CnnModel best = model;
  EarlyStopper stopper{cfg.patience};

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    double train_loss = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      const float inv = 1.0f / static_cast<float>(end - start);
      bool first = true;
      for (int b = start; b < end; ++b) {
        const int idx = order[b];
        auto out = model.forward_train(train_x.row(idx), rng, cache);
        double frame = 0.0;
        for (int d = 0; d < train_y.cols; ++d) {
          const double diff = out[d] - train_y.at(idx, d);
          frame += diff * diff;
        }
        train_loss += frame / train_y.cols;
        model.backward(cache, train_y.row(idx), sample_grads);
        if (first) {
          batch_grads = sample_grads;
          first = false;
        } else {
          batch_grads.accumulate(sample_grads, 1.0f);
        }
      }
      model.sgd_step(batch_grads, static_cast<float>(cfg.learning_rate) * inv);
    }
    train_loss /= n;
    const double val_loss = eval_mse(model, val_x, val_y);
    require(std::isfinite(train_loss) && std::isfinite(val_loss), "diverged",
            "non-finite loss at epoch " + std::to_string(epoch));
    result.history.push_back({train_loss, val_loss});

    const bool stop = stopper.observe(val_loss);
    if (stopper.best_epoch == epoch) best = model;
    result.stopped_epoch = epoch;
    if (stop) break;
  }

  model = best;
  model.trained = true;
  result.best_epoch = stopper.best_epoch;
  return result;
}

MatF predict_sequence(const CnnModel& model, const MatF& frames) {
  require(model.trained, "refused", "model has not been trained");
  const int pixels = model.arch.input_rows * model.arch.input_cols;
  MatF out(frames.rows, model.arch.output_dim);
  if (frames.rows == 0) return out;
  require(frames.cols == pixels, "invalid-input",
          "frame width does not match the architecture");
  std::vector<float> row(static_cast<size_t>(pixels));
  for (int r = 0; r < frames.rows; ++r) {
    const float* src = frames.row(r);
    if (!model.input_norm.mean.empty()) {
      for (int i = 0; i < pixels; ++i)
        row[i] = (src[i] - model.input_norm.mean[i]) /
                 model.input_norm.stddev[i];
      src = row.data();
    }
    auto y = model.forward(src);
    std::copy(y.begin(), y.end(), out.row(r));
  }
  if (!model.target_norm.mean.empty()) normalizer_invert(model.target_norm, out);
  return out;
}

namespace {

void write_normalizer_block(binio::Writer& w, const FeatureNormalizer& norm) {
  w.i32(norm.dims());
  w.f32_array(norm.mean.data(), norm.mean.size());
  w.f32_array(norm.stddev.data(), norm.stddev.size());
}

FeatureNormalizer read_normalizer_block(binio::Reader& r) {
  const int dims = r.i32("corrupt-model");
  require(dims >= 0, "corrupt-model", r.path() + ": negative normalizer dims");
  FeatureNormalizer norm;
  norm.mean.resize(dims);
  norm.stddev.resize(dims);
  r.f32_array(norm.mean.data(), norm.mean.size(), "corrupt-model");
  r.f32_array(norm.stddev.data(), norm.stddev.size(), "corrupt-model");
  return norm;
}

}  // namespace

void save_model(const std::string& path, const CnnModel& model) {
  binio::Writer w(path);
  w.magic("CNN1");
  w.i32(model.arch.input_rows);
  w.i32(model.arch.input_cols);
  w.i32(model.arch.kernel);
  for (int f : model.arch.conv_filters) w.i32(f);
  w.i32(model.arch.fc_units);
  w.i32(model.arch.output_dim);
  w.i32(static_cast<int32_t>(model.arch.activation));
  w.f32(model.arch.dropout);
  w.i32(model.trained ? 1 : 0);
  write_normalizer_block(w, model.input_norm);
  write_normalizer_block(w, model.target_norm);
  for (int l = 0; l < 4; ++l) {
    w.f32_array(model.conv_w[l].data.data(), model.conv_w[l].data.size());
    w.f32_array(model.conv_b[l].data(), model.conv_b[l].size());
  }
  w.f32_array(model.fc_w.data.data(), model.fc_w.data.size());
  w.f32_array(model.fc_b.data(), model.fc_b.size());
  w.f32_array(model.out_w.data.data(), model.out_w.data.size());
  w.f32_array(model.out_b.data(), model.out_b.size());
  w.close();
}

CnnModel load_model(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("CNN1", "corrupt-model");
  CnnArchitecture arch;
  arch.input_rows = r.i32("corrupt-model");
  arch.input_cols = r.i32("corrupt-model");
  arch.kernel = r.i32("corrupt-model");
  for (int l = 0; l < 4; ++l) arch.conv_filters[l] = r.i32("corrupt-model");
  arch.fc_units = r.i32("corrupt-model");
  arch.output_dim = r.i32("corrupt-model");
  arch.activation = static_cast<Activation>(r.i32("corrupt-model"));
  arch.dropout = r.f32("corrupt-model");
  const bool trained = r.i32("corrupt-model") != 0;
  try {
    arch.validate();
  } catch (const Error&) {
    fail("corrupt-model", path + ": implausible architecture block");
  }
  CnnModel model(arch);
  model.trained = trained;
  model.input_norm = read_normalizer_block(r);
  model.target_norm = read_normalizer_block(r);
  require(model.target_norm.mean.empty() ||
              model.target_norm.dims() == arch.output_dim,
          "corrupt-model", path + ": target normalizer dims mismatch");
  for (int l = 0; l < 4; ++l) {
    r.f32_array(model.conv_w[l].data.data(), model.conv_w[l].data.size(),
                "corrupt-model");
    r.f32_array(model.conv_b[l].data(), model.conv_b[l].size(),
                "corrupt-model");
  }
  r.f32_array(model.fc_w.data.data(), model.fc_w.data.size(), "corrupt-model");
  r.f32_array(model.fc_b.data(), model.fc_b.size(), "corrupt-model");
  r.f32_array(model.out_w.data.data(), model.out_w.data.size(),
              "corrupt-model");
  r.f32_array(model.out_b.data(), model.out_b.size(), "corrupt-model");
  for (const auto& w : model.conv_w)
    for (float v : w.data)
      require(std::isfinite(v), "corrupt-model", path + ": non-finite weight");
  return model;
}

void write_training_log(const std::string& path,
                        const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  require(out.good(), "io-error", "cannot write " + path);
  out << "epoch\ttrain_mse\tval_mse\n";
  for (size_t i = 0; i < history.size(); ++i)
    out << (i + 1) << "\t" << history[i].train_mse << "\t"
        << history[i].val_mse << "\n";
}

}  // namespace uti2speech
