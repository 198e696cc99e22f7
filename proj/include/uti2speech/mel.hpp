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

#include "uti2speech/melbank.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

// Dynamic-range floor inside the log compression ln(max(x, kMelFloor)).
constexpr double kMelFloor = 1e-5;

// Mel projection applies to the STFT magnitude, not the power spectrum
// (the convention of the neural-vocoder conditioning this export targets).
constexpr bool kMelUsePower = false;

struct MelSpectrogram {
  MatF values;  // frames x n_mels, log-compressed
  int hop = kHopSamples;
  int sample_rate = kSampleRate;

  int frames() const { return values.rows; }
  int dims() const { return values.cols; }
};

MelSpectrogram mel_spectrogram(const Waveform& wav, const StftConfig& cfg,
                               const MelFilterbank& fb);

// "MEL1" container: magic + {frames, dims, hop, sample_rate} as LE int32,
// then row-major LE float32 values.
void write_mel(const std::string& path, const MelSpectrogram& mel);
MelSpectrogram read_mel(const std::string& path);

// Per-dimension zero-mean/unit-variance statistics.
struct FeatureNormalizer {
  std::vector<float> mean;
  std::vector<float> stddev;          // floored at kStdFloor
  std::vector<int> floored_dims;      // constant dimensions, flagged
  static constexpr float kStdFloor = 1e-8f;

  int dims() const { return static_cast<int>(mean.size()); }
};

FeatureNormalizer fit_normalizer(const std::vector<const MatF*>& mats);
void normalizer_apply(const FeatureNormalizer& norm, MatF& feats);
void normalizer_invert(const FeatureNormalizer& norm, MatF& feats);

// "NRM1": magic + dims (LE int32) + mean then stddev as LE float32.
void write_normalizer(const std::string& path, const FeatureNormalizer& norm);
FeatureNormalizer read_normalizer(const std::string& path);

}  // namespace uti2speech
