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

#include <complex>
#include <vector>

#include "uti2speech/common.hpp"

namespace uti2speech {

struct StftConfig {
  int fft_size = 1024;
  int win_size = 1024;
  int hop = kHopSamples;
};

// One-sided complex spectrogram, frames x (fft_size/2 + 1).
struct Spectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> data;

  Spectrogram() = default;
  Spectrogram(int t, int k) : frames(t), bins(k), data(size_t(t) * k) {}
  std::complex<double>& at(int t, int k) {
    return data[static_cast<size_t>(t) * bins + k];
  }
  const std::complex<double>& at(int t, int k) const {
    return data[static_cast<size_t>(t) * bins + k];
  }
};

// Periodic Hann window.
std::vector<double> hann_window(int n);

// Frame count of a centered analysis: floor(n / hop) + 1.
int stft_frame_count(int n, int hop);

// Reflect-padded index into a signal of length n ("mirror" extension).
int reflect_index(int i, int n);

// Centered STFT: frame t covers samples [t*hop - fft/2, t*hop + fft/2)
// of the reflect-padded signal, windowed then transformed.
Spectrogram stft(const Waveform& wav, const StftConfig& cfg);

// Weighted overlap-add inverse with window-square normalization; returns
// `length` samples (defaults to (frames-1)*hop).
std::vector<double> istft(const Spectrogram& spec, const StftConfig& cfg,
                          int length = -1);

}  // namespace uti2speech
