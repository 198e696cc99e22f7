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

#include "uti2speech/stft.hpp"

#include <cmath>

#include "uti2speech/fft.hpp"

namespace uti2speech {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

int stft_frame_count(int n, int hop) { return n / hop + 1; }

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

Spectrogram stft(const Waveform& wav, const StftConfig& cfg) {
  require(wav.size() >= 1, "empty-signal", "cannot analyze empty signal");
  require(cfg.win_size <= cfg.fft_size && cfg.hop >= 1, "invalid-config",
          "need win_size <= fft_size and hop >= 1");
  const int n = wav.size();
  const int frames = stft_frame_count(n, cfg.hop);
  const int bins = cfg.fft_size / 2 + 1;
  const auto window = hann_window(cfg.win_size);
  const int pad = cfg.fft_size / 2;
  const int win_off = (cfg.fft_size - cfg.win_size) / 2;

  Spectrogram out(frames, bins);
  std::vector<double> buf(static_cast<size_t>(cfg.fft_size));
  for (int t = 0; t < frames; ++t) {
    const int start = t * cfg.hop - pad;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < cfg.win_size; ++i) {
      const int src = reflect_index(start + win_off + i, n);
      buf[win_off + i] = window[i] * wav.samples[src];
    }
    auto spec = rfft(buf.data(), cfg.fft_size, cfg.fft_size);
    std::copy(spec.begin(), spec.end(), out.data.begin() + size_t(t) * bins);
  }
  return out;
}

std::vector<double> istft(const Spectrogram& spec, const StftConfig& cfg,
                          int length) {
  require(spec.frames >= 1 && spec.bins == cfg.fft_size / 2 + 1,
          "invalid-input", "spectrogram shape does not match config");
  if (length < 0) length = (spec.frames - 1) * cfg.hop;
  const auto window = hann_window(cfg.win_size);
  const int pad = cfg.fft_size / 2;
  const int win_off = (cfg.fft_size - cfg.win_size) / 2;

  const int total = length + 2 * pad;
  std::vector<double> acc(static_cast<size_t>(total), 0.0);
  std::vector<double> norm(static_cast<size_t>(total), 0.0);
  for (int t = 0; t < spec.frames; ++t) {
    auto frame = irfft(&spec.at(t, 0), cfg.fft_size);
    const int start = t * cfg.hop;  // position in padded coordinates
    for (int i = 0; i < cfg.win_size; ++i) {
      const int dst = start + win_off + i;
      if (dst < 0 || dst >= total) continue;
      acc[dst] += window[i] * frame[win_off + i];
      norm[dst] += window[i] * window[i];
    }
  }
  std::vector<double> out(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) {
    const double d = norm[i + pad];
    out[i] = d > 1e-12 ? acc[i + pad] / d : 0.0;
  }
  return out;
}

}  // namespace uti2speech
