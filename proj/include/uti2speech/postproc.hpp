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

#include <string>
#include <vector>

#include "uti2speech/mel.hpp"

namespace uti2speech {

// Conditioning hop of the published neural vocoders the export targets.
constexpr int kConditioningHop = 256;

// Per-channel cubic time resampling from mel.hop to target_hop with edge
// clamping; the new frame count is ceil(T * hop / target_hop).
MelSpectrogram resample_hop(const MelSpectrogram& mel, int target_hop);

struct SmoothingConfig {
  int window = 5;
  int polyorder = 3;
};

// Least-squares Savitzky-Golay kernel for the center sample.
std::vector<double> savgol_kernel(int window, int polyorder);

// Mirror-padded smoothing along time, per mel channel.
MelSpectrogram savgol_smooth(const MelSpectrogram& mel,
                             const SmoothingConfig& cfg = {});

// Writes the MEL1 conditioning file; refuses input not at the
// conditioning hop.
void export_conditioning(const std::string& path, const MelSpectrogram& mel);

struct GriffinLimResult {
  Waveform wav;
  std::vector<double> residuals;  // spectral convergence per iteration
};

// Log-mel to waveform: projected-gradient nonnegative least squares
// against the filterbank recovers a linear magnitude spectrogram, then
// classic Griffin-Lim phase reconstruction (monotone residual), seeded
// random initial phase.
GriffinLimResult griffin_lim(const MelSpectrogram& mel,
                             const MelFilterbank& fb, int iterations = 60,
                             uint64_t seed = 0);

}  // namespace uti2speech
