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

#include "uti2speech/common.hpp"

namespace uti2speech {

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  int n_mels = 0;
  int n_fft = 0;
  int sample_rate = kSampleRate;
  double fmin = 0.0;
  double fmax = 0.0;
  MatD weights;                    // n_mels x (n_fft/2 + 1)
  std::vector<double> centers_hz;  // triangle peak per filter

  int bins() const { return n_fft / 2 + 1; }
  double hz_per_bin() const {
    return static_cast<double>(sample_rate) / n_fft;
  }
};

// Triangular filters with equally spaced mel centers; each row is scaled
// so its discrete area over Hz (row sum times Hz-per-bin) is exactly one.
MelFilterbank build_mel_filterbank(double fmin = 0.0, double fmax = 8000.0,
                                   int n_mels = 80, int n_fft = 1024,
                                   int sample_rate = kSampleRate);

}  // namespace uti2speech
