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

#include "uti2speech/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "binio.hpp"
#include "uti2speech/contf0.hpp"
#include "uti2speech/mvf.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kFirTaps = 67;     // MVF split filters (odd, zero-phase)
constexpr double kLspMinGap = 1e-3;

// Mel-cepstral coefficients to warped-filter taps.
std::vector<double> mc2b(const std::vector<double>& c, double alpha) {
  std::vector<double> b(c.size());
  const int m = static_cast<int>(c.size()) - 1;
  b[m] = c[m];
  for (int i = m - 1; i >= 0; --i) b[i] = c[i] - alpha * b[i + 1];
  return b;
}

// One stage of the MGLSA cascade (warped all-pole section).
double mglsa_stage(double x, const double* b, int m, double alpha, double* d) {
  double y = d[0] * b[1];
  for (int i = 1; i < m; ++i) {
    d[i] += alpha * (d[i + 1] - d[i - 1]);
    y += d[i] * b[i + 1];
  }
  x -= y;
  for (int i = m; i > 0; --i) d[i] = d[i - 1];
  d[0] = alpha * d[0] + (1.0 - alpha * alpha) * x;
  return x;
}

// Per-frame synthesis coefficients: [linear gain, gamma-scaled warped taps].
std::vector<double> frame_filter_coefs(const ContParams& params, int t,
                                       const MgcConfig& cfg) {
  LspFrame frame;
  frame.gain = params.gain[t];
  frame.lsp.assign(params.lsp.row(t), params.lsp.row(t) + params.order);
  auto mgc = lsp_to_mgc(frame, cfg);
  auto b = mc2b(mgc, cfg.alpha);
  auto norm = gnorm(b, cfg.gamma);
  for (size_t i = 1; i < norm.size(); ++i) norm[i] *= cfg.gamma;
  return norm;  // norm[0] is the linear gain
}

// The canonical residual prototype is an impulse under a two-period Hann
// window; band-limited (windowed-sinc) resampling of it to a local period
// yields one excitation instance. Resampling the impulse analytically is
// the sinc kernel itself, which keeps the excitation spectrally flat up
// to the kPulseBandwidth fraction of Nyquist.
constexpr double kPulseBandwidth = 0.95;

std::vector<double> pulse_instance(int len) {
  std::vector<double> p(static_cast<size_t>(len));
  const double center = 0.5 * (len - 1);
  for (int i = 0; i < len; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (len - 1));
    const double x = i - center;
    const double arg = kPi * kPulseBandwidth * x;
    const double pulse = std::fabs(arg) < 1e-9
                             ? kPulseBandwidth
                             : kPulseBandwidth * std::sin(arg) / arg;
    p[i] = w * pulse;
  }
  return p;
}

// Zero-phase windowed-sinc lowpass taps with unit DC gain.
std::vector<double> lowpass_taps(double cutoff_hz, int sample_rate) {
  std::vector<double> h(kFirTaps);
  const int mid = kFirTaps / 2;
  const double fc = std::clamp(cutoff_hz / sample_rate, 0.001, 0.499);
  double sum = 0.0;
  for (int i = 0; i < kFirTaps; ++i) {
    const int k = i - mid;
    const double sinc =
        k == 0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * k) / (kPi * k);
    const double win =
        0.54 - 0.46 * std::cos(2.0 * kPi * i / (kFirTaps - 1));
    h[i] = sinc * win;
    sum += h[i];
  }
  for (auto& v : h) v /= sum;
  return h;
}

}  // namespace

void validate_params(const ContParams& params) {
  const int t_frames = params.frames();
  require(t_frames >= 1, "invalid-params", "no frames");
  require(params.order >= 2 && params.order % 2 == 0, "invalid-params",
          "order must be even and >= 2");
  require(static_cast<int>(params.log_f0.size()) == t_frames &&
              static_cast<int>(params.log_mvf.size()) == t_frames &&
              params.lsp.rows == t_frames && params.lsp.cols == params.order,
          "invalid-params", "inconsistent field lengths");
  const double eps = 1e-6;
  for (int t = 0; t < t_frames; ++t) {
    require(std::isfinite(params.gain[t]), "invalid-params", "non-finite gain");
    const double f0 = std::exp(params.log_f0[t]);
    require(f0 >= kF0Min - eps && f0 <= kF0Max + eps, "invalid-params",
            "F0 outside [50, 400] Hz at frame " + std::to_string(t));
    const double mvf = std::exp(params.log_mvf[t]);
    require(mvf >= kMvfMin - eps && mvf <= kMvfMax + eps, "invalid-params",
            "MVF outside [500, 11025] Hz at frame " + std::to_string(t));
    double prev = 0.0;
    for (int i = 0; i < params.order; ++i) {
      const double w = params.lsp.at(t, i);
      require(w > prev && w < kPi, "invalid-params",
              "LSPs not ascending in (0, pi) at frame " + std::to_string(t));
      prev = w;
    }
  }
}

ContParams analyze_utterance(const Waveform& wav, const MgcConfig& cfg) {
  auto mgc = analyze_mgc(wav, cfg);
  ContParams params;
  params.order = cfg.order;
  const int t_frames = mgc.rows;
  params.gain.resize(t_frames);
  params.lsp = MatD(t_frames, cfg.order);
  std::vector<double> c(static_cast<size_t>(cfg.order) + 1);
  for (int t = 0; t < t_frames; ++t) {
    std::copy(mgc.row(t), mgc.row(t) + cfg.order + 1, c.begin());
    auto frame = mgc_to_lsp(c, cfg);
    params.gain[t] = frame.gain;
    std::copy(frame.lsp.begin(), frame.lsp.end(), params.lsp.row(t));
  }
  params.log_f0 = track_contf0(wav, cfg.hop);
  params.log_mvf = estimate_mvf(wav, params.log_f0, cfg.hop);
  return params;
}

Waveform synthesize(const ContParams& params, const MgcConfig& cfg,
                    uint64_t noise_seed) {
  validate_params(params);
  const int t_frames = params.frames();
  const int hop = cfg.hop;
  const int n = t_frames * hop;
  const int sr = kSampleRate;

  // Per-frame filter coefficients, interpolated per sample below.
  std::vector<std::vector<double>> coefs(t_frames);
  for (int t = 0; t < t_frames; ++t)
    coefs[t] = frame_filter_coefs(params, t, cfg);

  // Voiced branch: prototype instances overlap-added at pitch marks.
  std::vector<double> voiced(static_cast<size_t>(n), 0.0);
  double phase = 0.5;  // first mark lands mid period, not at sample 0
  for (int s = 0; s < n; ++s) {
    const double f0 = std::exp(params.log_f0[s / hop]);
    phase += f0 / sr;
    if (phase < 1.0) continue;
    phase -= 1.0;
    const double period = sr / f0;
    const int len = std::max(8, 2 * static_cast<int>(std::lround(period)));
    auto instance = pulse_instance(len);
    double energy = 0.0;
    for (double v : instance) energy += v * v;
    const double scale = energy > 0.0 ? std::sqrt(period / energy) : 0.0;
    for (int j = 0; j < len; ++j) {
      const int dst = s - len / 2 + j;
      if (dst >= 0 && dst < n) voiced[dst] += scale * instance[j];
    }
  }

  // Noise branch.
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(static_cast<size_t>(n));
  for (auto& v : noise) v = gauss(rng);

  // MVF split: lowpassed voiced + complementary-highpassed noise.
  std::vector<std::vector<double>> lp(t_frames);
  for (int t = 0; t < t_frames; ++t)
    lp[t] = lowpass_taps(std::exp(params.log_mvf[t]), sr);
  const int mid = kFirTaps / 2;
  std::vector<double> excitation(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s) {
    const auto& h = lp[s / hop];
    double v = 0.0, w = 0.0;
    for (int j = 0; j < kFirTaps; ++j) {
      const int src = s - mid + j;
      if (src < 0 || src >= n) continue;
      v += h[j] * voiced[src];
      w += h[j] * noise[src];
    }
    excitation[s] = v + (noise[s] - w);
  }

  // MGLSA cascade with per-sample coefficient interpolation.
  const int order = params.order;
  const int stages = cfg.stages();
  require(stages >= 1, "invalid-params",
          "synthesis requires 1/|gamma| integer stages");
  std::vector<double> d(static_cast<size_t>(stages) * (order + 1), 0.0);
  std::vector<double> cur(coefs[0]);
  Waveform out;
  out.sample_rate = sr;
  out.samples.resize(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s) {
    const int t = s / hop;
    const auto& a = coefs[t];
    const auto& b = coefs[std::min(t + 1, t_frames - 1)];
    const double frac = static_cast<double>(s - t * hop) / hop;
    for (int i = 0; i <= order; ++i) cur[i] = a[i] + (b[i] - a[i]) * frac;

    double x = excitation[s] * cur[0];
    for (int st = 0; st < stages; ++st)
      x = mglsa_stage(x, cur.data(), order, cfg.alpha,
                      d.data() + static_cast<size_t>(st) * (order + 1));
    out.samples[s] = x;
  }
  return out;
}

MatF contparams_to_spectral(const ContParams& params) {
  MatF out(params.frames(), params.order + 1);
  for (int t = 0; t < params.frames(); ++t) {
    out.at(t, 0) = static_cast<float>(params.gain[t]);
    for (int i = 0; i < params.order; ++i)
      out.at(t, i + 1) = static_cast<float>(params.lsp.at(t, i));
  }
  return out;
}

MatF contparams_to_excitation(const ContParams& params) {
  MatF out(params.frames(), 2);
  for (int t = 0; t < params.frames(); ++t) {
    out.at(t, 0) = static_cast<float>(params.log_f0[t]);
    out.at(t, 1) = static_cast<float>(params.log_mvf[t]);
  }
  return out;
}

ContParams features_to_contparams(const MatF& spectral,
                                  const MatF& excitation) {
  require(spectral.rows == excitation.rows, "invalid-input",
          "spectral and excitation frame counts differ");
  require(spectral.cols >= 3 && (spectral.cols - 1) % 2 == 0 &&
              excitation.cols == 2,
          "invalid-input", "unexpected feature dimensions");
  ContParams params;
  params.order = spectral.cols - 1;
  const int t_frames = spectral.rows;
  params.gain.resize(t_frames);
  params.log_f0.resize(t_frames);
  params.log_mvf.resize(t_frames);
  params.lsp = MatD(t_frames, params.order);
  std::vector<double> w(static_cast<size_t>(params.order));
  for (int t = 0; t < t_frames; ++t) {
    params.gain[t] = spectral.at(t, 0);
    for (int i = 0; i < params.order; ++i) w[i] = spectral.at(t, i + 1);
    // Project into the valid region: sort, clamp, enforce a minimum gap.
    std::sort(w.begin(), w.end());
    const double hi_limit = kPi - kLspMinGap * (params.order + 1);
    for (int i = 0; i < params.order; ++i) {
      double lo = (i == 0 ? kLspMinGap : w[i - 1] + kLspMinGap);
      w[i] = std::clamp(w[i], lo, hi_limit + kLspMinGap * i);
      if (i > 0 && w[i] <= w[i - 1]) w[i] = w[i - 1] + kLspMinGap;
    }
    for (int i = 0; i < params.order; ++i) params.lsp.at(t, i) = w[i];
    params.log_f0[t] = std::clamp(
        static_cast<double>(excitation.at(t, 0)), std::log(kF0Min),
        std::log(kF0Max));
    params.log_mvf[t] = std::clamp(
        static_cast<double>(excitation.at(t, 1)), std::log(kMvfMin),
        std::log(kMvfMax));
  }
  return params;
}

void write_contparams(const std::string& path, const ContParams& params) {
  binio::Writer w(path);
  w.magic("CVP1");
  w.i32(params.frames());
  w.i32(params.order);
  for (int t = 0; t < params.frames(); ++t) {
    w.f32(static_cast<float>(params.gain[t]));
    for (int i = 0; i < params.order; ++i)
      w.f32(static_cast<float>(params.lsp.at(t, i)));
    w.f32(static_cast<float>(params.log_f0[t]));
    w.f32(static_cast<float>(params.log_mvf[t]));
  }
  w.close();
}

ContParams read_contparams(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("CVP1", "malformed-contparams");
  const int t_frames = r.i32("malformed-contparams");
  const int order = r.i32("malformed-contparams");
  require(t_frames >= 0 && order >= 2, "malformed-contparams",
          path + ": implausible header");
  ContParams params;
  params.order = order;
  params.gain.resize(t_frames);
  params.log_f0.resize(t_frames);
  params.log_mvf.resize(t_frames);
  params.lsp = MatD(t_frames, order);
  for (int t = 0; t < t_frames; ++t) {
    params.gain[t] = r.f32("malformed-contparams");
    for (int i = 0; i < order; ++i)
      params.lsp.at(t, i) = r.f32("malformed-contparams");
    params.log_f0[t] = r.f32("malformed-contparams");
    params.log_mvf[t] = r.f32("malformed-contparams");
  }
  return params;
}

}  // namespace uti2speech
