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

#include "uti2speech/postproc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "uti2speech/resize.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

MelSpectrogram resample_hop(const MelSpectrogram& mel, int target_hop) {
  require(target_hop >= 1, "invalid-input", "target hop must be positive");
  require(mel.frames() >= 4, "too-short",
          "need at least 4 frames for cubic resampling, got " +
              std::to_string(mel.frames()));
  const int t_in = mel.frames();
  const double ratio = static_cast<double>(mel.hop) / target_hop;
  const int t_out = static_cast<int>(std::ceil(t_in * ratio));

  MelSpectrogram out;
  out.hop = target_hop;
  out.sample_rate = mel.sample_rate;
  out.values = MatF(t_out, mel.dims());
  for (int t = 0; t < t_out; ++t) {
    // Output frame t sits at sample t*target_hop = source position
    // t/ratio in frames.
    const double pos = t / ratio;
    const int base = static_cast<int>(std::floor(pos)) - 1;
    double w[4];
    int idx[4];
    for (int k = 0; k < 4; ++k) {
      idx[k] = std::clamp(base + k, 0, t_in - 1);
      w[k] = cubic_kernel(pos - (base + k));
    }
    for (int d = 0; d < mel.dims(); ++d) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += w[k] * mel.values.at(idx[k], d);
      out.values.at(t, d) = static_cast<float>(acc);
    }
  }
  return out;
}

std::vector<double> savgol_kernel(int window, int polyorder) {
  require(window >= 3 && window % 2 == 1, "invalid-config",
          "window must be odd and >= 3");
  require(polyorder >= 0 && polyorder < window, "invalid-config",
          "polynomial order must be below the window size");
  const int half = window / 2;
  Eigen::MatrixXd a(window, polyorder + 1);
  for (int i = -half; i <= half; ++i)
    for (int j = 0; j <= polyorder; ++j)
      a(i + half, j) = std::pow(static_cast<double>(i), j);
  // Center-sample smoothing weights: first row of (A^T A)^-1 A^T.
  Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(polyorder + 1);
  e0[0] = 1.0;
  Eigen::VectorXd coef = a * ata.ldlt().solve(e0);
  return {coef.data(), coef.data() + window};
}

MelSpectrogram savgol_smooth(const MelSpectrogram& mel,
                             const SmoothingConfig& cfg) {
  require(mel.frames() >= cfg.window, "too-short",
          "need at least " + std::to_string(cfg.window) + " frames, got " +
              std::to_string(mel.frames()));
  const auto kernel = savgol_kernel(cfg.window, cfg.polyorder);
  const int half = cfg.window / 2;
  const int t_n = mel.frames();

  MelSpectrogram out = mel;
  for (int t = 0; t < t_n; ++t) {
    for (int d = 0; d < mel.dims(); ++d) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        int src = t + k;
        if (src < 0) src = -src;                      // mirror
        if (src >= t_n) src = 2 * (t_n - 1) - src;    // mirror
        acc += kernel[k + half] * mel.values.at(src, d);
      }
      out.values.at(t, d) = static_cast<float>(acc);
    }
  }
  return out;
}

void export_conditioning(const std::string& path, const MelSpectrogram& mel) {
  require(mel.hop == kConditioningHop, "refused",
          "conditioning export expects hop " +
              std::to_string(kConditioningHop) + ", got " +
              std::to_string(mel.hop) + "; resample first");
  write_mel(path, mel);
}

namespace {

// Projected Landweber iterations for nonnegative least squares
// ||W m - target||^2, m >= 0, per frame.
void nnls_frame(const MatD& weights, const std::vector<double>& target,
                std::vector<double>& m) {
  const int rows = weights.rows, cols = weights.cols;
  // Step size from an upper bound on ||W^T W||.
  double norm2 = 0.0;
  for (const double w : weights.data) norm2 += w * w;
  const double step = 1.0 / std::max(norm2, 1e-12);

  std::vector<double> residual(static_cast<size_t>(rows));
  for (int iter = 0; iter < 200; ++iter) {
    for (int r = 0; r < rows; ++r) {
      double acc = -target[r];
      const double* wr = weights.row(r);
      for (int c = 0; c < cols; ++c) acc += wr[c] * m[c];
      residual[r] = acc;
    }
    for (int c = 0; c < cols; ++c) {
      double grad = 0.0;
      for (int r = 0; r < rows; ++r) grad += weights.at(r, c) * residual[r];
      m[c] = std::max(0.0, m[c] - step * grad);
    }
  }
}

}  // namespace

GriffinLimResult griffin_lim(const MelSpectrogram& mel,
                             const MelFilterbank& fb, int iterations,
                             uint64_t seed) {
  require(iterations >= 1, "invalid", "need at least one iteration");
  require(mel.dims() == fb.n_mels, "invalid-input",
          "mel dimensions do not match the filterbank");
  const int t_n = mel.frames();
  const int bins = fb.bins();
  require(t_n >= 1, "invalid-input", "empty spectrogram");

  // Invert the log compression and the mel projection.
  MatD target(t_n, fb.n_mels);
  for (int t = 0; t < t_n; ++t)
    for (int d = 0; d < fb.n_mels; ++d)
      target.at(t, d) = std::exp(static_cast<double>(mel.values.at(t, d)));

  MatD magnitude(t_n, bins);
  {
    // Warm start from W^T applied to the target, then NNLS per frame.
    std::vector<double> m(static_cast<size_t>(bins));
    std::vector<double> row_target(static_cast<size_t>(fb.n_mels));
    for (int t = 0; t < t_n; ++t) {
      for (int d = 0; d < fb.n_mels; ++d) row_target[d] = target.at(t, d);
      for (int c = 0; c < bins; ++c) {
        double acc = 0.0;
        for (int d = 0; d < fb.n_mels; ++d)
          acc += fb.weights.at(d, c) * row_target[d];
        m[c] = std::max(0.0, acc);
      }
      nnls_frame(fb.weights, row_target, m);
      for (int c = 0; c < bins; ++c) magnitude.at(t, c) = m[c];
    }
  }

  StftConfig cfg;
  cfg.hop = mel.hop;
  cfg.fft_size = fb.n_fft;
  cfg.win_size = fb.n_fft;
  const int length = (t_n - 1) * cfg.hop;

  GriffinLimResult result;
  result.wav.sample_rate = mel.sample_rate;
  if (length <= 0) {
    result.wav.samples.assign(static_cast<size_t>(cfg.hop) * t_n, 0.0);
    result.residuals.assign(static_cast<size_t>(iterations), 0.0);
    return result;
  }

  // Random initial phase, then classic alternating projections.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-3.14159265358979323846,
                                             3.14159265358979323846);
  Spectrogram spec(t_n, bins);
  for (int t = 0; t < t_n; ++t) {
    for (int k = 0; k < bins; ++k) {
      const double phi = uni(rng);
      spec.at(t, k) = std::polar(magnitude.at(t, k), phi);
    }
  }

  double mag_norm = 0.0;
  for (const double v : magnitude.data) mag_norm += v * v;
  mag_norm = std::sqrt(std::max(mag_norm, 1e-30));

  Waveform wav;
  wav.sample_rate = mel.sample_rate;
  for (int iter = 0; iter < iterations; ++iter) {
    wav.samples = istft(spec, cfg, length);
    Spectrogram est = stft(wav, cfg);
    double err = 0.0;
    for (int t = 0; t < t_n; ++t) {
      for (int k = 0; k < bins; ++k) {
        const std::complex<double> v =
            t < est.frames ? est.at(t, k) : std::complex<double>(0.0);
        const double a = std::abs(v);
        err += (a - magnitude.at(t, k)) * (a - magnitude.at(t, k));
        spec.at(t, k) =
            a > 1e-30 ? v * (magnitude.at(t, k) / a)
                      : std::complex<double>(magnitude.at(t, k), 0.0);
      }
    }
    result.residuals.push_back(std::sqrt(err) / mag_norm);
  }
  result.wav.samples = istft(spec, cfg, length);
  return result;
}

}  // namespace uti2speech
