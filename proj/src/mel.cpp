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

#include "uti2speech/mel.hpp"

#include <cmath>

#include "binio.hpp"

namespace uti2speech {

MelSpectrogram mel_spectrogram(const Waveform& wav, const StftConfig& cfg,
                               const MelFilterbank& fb) {
  require_standard_rate(wav);
  require(fb.n_fft == cfg.fft_size, "invalid-config",
          "filterbank FFT size does not match STFT config");
  const Spectrogram spec = stft(wav, cfg);

  MelSpectrogram mel;
  mel.hop = cfg.hop;
  mel.sample_rate = wav.sample_rate;
  mel.values = MatF(spec.frames, fb.n_mels);
  std::vector<double> mag(static_cast<size_t>(spec.bins));
  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < spec.bins; ++k) {
      const double a = std::abs(spec.at(t, k));
      mag[k] = kMelUsePower ? a * a : a;
    }
    for (int m = 0; m < fb.n_mels; ++m) {
      const double* w = fb.weights.row(m);
      double acc = 0.0;
      for (int k = 0; k < spec.bins; ++k) acc += w[k] * mag[k];
      mel.values.at(t, m) =
          static_cast<float>(std::log(std::max(acc, kMelFloor)));
    }
  }
  return mel;
}

void write_mel(const std::string& path, const MelSpectrogram& mel) {
  binio::Writer w(path);
  w.magic("MEL1");
  w.i32(mel.frames());
  w.i32(mel.dims());
  w.i32(mel.hop);
  w.i32(mel.sample_rate);
  w.f32_array(mel.values.data.data(), mel.values.data.size());
  w.close();
}

MelSpectrogram read_mel(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("MEL1", "malformed-mel");
  MelSpectrogram mel;
  const int frames = r.i32("malformed-mel");
  const int dims = r.i32("malformed-mel");
  mel.hop = r.i32("malformed-mel");
  mel.sample_rate = r.i32("malformed-mel");
  require(frames >= 0 && dims >= 1 && mel.hop >= 1, "malformed-mel",
          path + ": implausible header");
  mel.values = MatF(frames, dims);
  r.f32_array(mel.values.data.data(), mel.values.data.size(),
              "malformed-mel");
  return mel;
}

FeatureNormalizer fit_normalizer(const std::vector<const MatF*>& mats) {
  size_t total = 0;
  int dims = 0;
  for (const MatF* m : mats) {
    if (!m || m->rows == 0) continue;
    if (dims == 0) dims = m->cols;
    require(m->cols == dims, "invalid-input",
            "inconsistent feature dimensions across matrices");
    total += static_cast<size_t>(m->rows);
  }
  require(dims > 0 && total >= 2, "too-few-frames",
          "need at least 2 training frames to fit a normalizer");

  std::vector<double> sum(dims, 0.0), sq(dims, 0.0);
  for (const MatF* m : mats) {
    if (!m) continue;
    for (int r = 0; r < m->rows; ++r) {
      const float* row = m->row(r);
      for (int d = 0; d < dims; ++d) {
        sum[d] += row[d];
        sq[d] += static_cast<double>(row[d]) * row[d];
      }
    }
  }
  FeatureNormalizer norm;
  norm.mean.resize(dims);
  norm.stddev.resize(dims);
  for (int d = 0; d < dims; ++d) {
    const double mean = sum[d] / static_cast<double>(total);
    const double var =
        std::max(0.0, sq[d] / static_cast<double>(total) - mean * mean);
    double sd = std::sqrt(var);
    if (sd < FeatureNormalizer::kStdFloor) {
      sd = FeatureNormalizer::kStdFloor;
      norm.floored_dims.push_back(d);
    }
    norm.mean[d] = static_cast<float>(mean);
    norm.stddev[d] = static_cast<float>(sd);
  }
  return norm;
}

void normalizer_apply(const FeatureNormalizer& norm, MatF& feats) {
  require(feats.cols == norm.dims(), "invalid-input",
          "feature dims do not match normalizer");
  for (int r = 0; r < feats.rows; ++r) {
    float* row = feats.row(r);
    for (int d = 0; d < feats.cols; ++d)
      row[d] = (row[d] - norm.mean[d]) / norm.stddev[d];
  }
}

void normalizer_invert(const FeatureNormalizer& norm, MatF& feats) {
  require(feats.cols == norm.dims(), "invalid-input",
          "feature dims do not match normalizer");
  for (int r = 0; r < feats.rows; ++r) {
    float* row = feats.row(r);
    for (int d = 0; d < feats.cols; ++d)
      row[d] = row[d] * norm.stddev[d] + norm.mean[d];
  }
}

void write_normalizer(const std::string& path, const FeatureNormalizer& norm) {
  binio::Writer w(path);
  w.magic("NRM1");
  w.i32(norm.dims());
  w.f32_array(norm.mean.data(), norm.mean.size());
  w.f32_array(norm.stddev.data(), norm.stddev.size());
  w.close();
}

FeatureNormalizer read_normalizer(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("NRM1", "malformed-normalizer");
  const int dims = r.i32("malformed-normalizer");
  require(dims >= 1, "malformed-normalizer", path + ": implausible dims");
  FeatureNormalizer norm;
  norm.mean.resize(dims);
  norm.stddev.resize(dims);
  r.f32_array(norm.mean.data(), norm.mean.size(), "malformed-normalizer");
  r.f32_array(norm.stddev.data(), norm.stddev.size(), "malformed-normalizer");
  for (int d = 0; d < dims; ++d)
    if (norm.stddev[d] <= FeatureNormalizer::kStdFloor)
      norm.floored_dims.push_back(d);
  return norm;
}

}  // namespace uti2speech
