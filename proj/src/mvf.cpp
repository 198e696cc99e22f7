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

#include "uti2speech/mvf.hpp"

#include <algorithm>
#include <cmath>

#include "uti2speech/fft.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

namespace {

constexpr int kWin = 1024;
constexpr int kFft = 2048;

// Mean power over the bins covering [center - half, center + half] Hz.
double band_power(const std::vector<double>& power, double center,
                  double half, double hz_per_bin) {
  int lo = static_cast<int>(std::lround((center - half) / hz_per_bin));
  int hi = static_cast<int>(std::lround((center + half) / hz_per_bin));
  lo = std::max(lo, 0);
  hi = std::min(hi, static_cast<int>(power.size()) - 1);
  if (hi < lo) return 0.0;
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k) acc += power[k];
  return acc / (hi - lo + 1);
}

double frame_mvf(const std::vector<double>& power, double f0,
                 double hz_per_bin, double nyquist) {
  const double quarter = 0.25 * f0;
  int last_voiced = 0;
  int best_pair = 0;
  for (int k = 1; k * f0 + quarter < nyquist; ++k) {
    const double h = k * f0;
    const double peak = band_power(power, h, quarter, hz_per_bin);
    const double left = band_power(power, h - 0.5 * f0, quarter, hz_per_bin);
    double valley;
    if (h + 0.5 * f0 + quarter >= nyquist) {
      valley = left;
    } else {
      valley = std::max(left,
                        band_power(power, h + 0.5 * f0, quarter, hz_per_bin));
    }
    const bool voiced =
        peak > valley * std::pow(10.0, kMvfProminenceDb / 10.0) &&
        peak > 0.0;
    if (voiced && last_voiced == k - 1 && k >= 2) best_pair = k;
    if (voiced) last_voiced = k;
  }
  if (best_pair == 0) return kMvfMin;
  return std::clamp(best_pair * f0, kMvfMin, kMvfMax);
}

}  // namespace

std::vector<double> estimate_mvf(const Waveform& wav,
                                 const std::vector<double>& log_f0, int hop) {
  require_standard_rate(wav);
  const int n = wav.size();
  const int frames = stft_frame_count(n, hop);
  require(static_cast<int>(log_f0.size()) == frames, "invalid-input",
          "f0 contour length does not match frame count");

  const auto window = hann_window(kWin);
  const double hz_per_bin = static_cast<double>(wav.sample_rate) / kFft;
  const double nyquist = wav.sample_rate / 2.0;

  std::vector<double> raw(static_cast<size_t>(frames));
  std::vector<double> buf(static_cast<size_t>(kFft));
  std::vector<double> power(static_cast<size_t>(kFft / 2) + 1);
  for (int t = 0; t < frames; ++t) {
    const int start = t * hop - kWin / 2;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < kWin; ++i)
      buf[i] = window[i] * wav.samples[reflect_index(start + i, n)];
    auto spec = rfft(buf.data(), kFft, kFft);
    for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    raw[t] = frame_mvf(power, std::exp(log_f0[t]), hz_per_bin, nyquist);
  }

  // 5-frame median, shrinking toward the edges.
  std::vector<double> out(static_cast<size_t>(frames));
  std::vector<double> win;
  for (int t = 0; t < frames; ++t) {
    const int lo = std::max(0, t - 2);
    const int hi = std::min(frames - 1, t + 2);
    win.assign(raw.begin() + lo, raw.begin() + hi + 1);
    std::nth_element(win.begin(), win.begin() + win.size() / 2, win.end());
    const double med = win[win.size() / 2];
    out[t] = std::log(std::clamp(med, kMvfMin, kMvfMax));
  }
  return out;
}

}  // namespace uti2speech
