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

#include "uti2speech/melbank.hpp"

#include <algorithm>
#include <cmath>

namespace uti2speech {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_mel_filterbank(double fmin, double fmax, int n_mels,
                                   int n_fft, int sample_rate) {
  require(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0,
          "invalid-range",
          "need 0 <= fmin < fmax <= Nyquist");
  require(n_mels >= 1 && n_fft >= 2, "invalid-range",
          "need n_mels >= 1 and n_fft >= 2");

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_fft = n_fft;
  fb.sample_rate = sample_rate;
  fb.fmin = fmin;
  fb.fmax = fmax;
  const int bins = fb.bins();
  fb.weights = MatD(n_mels, bins);
  fb.centers_hz.resize(static_cast<size_t>(n_mels));

  // n_mels + 2 equally spaced mel points; filter m spans edges[m]..edges[m+2]
  // with its peak at edges[m+1].
  std::vector<double> edge_hz(static_cast<size_t>(n_mels) + 2);
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  for (int i = 0; i < n_mels + 2; ++i)
    edge_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  const double df = fb.hz_per_bin();
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edge_hz[m], mid = edge_hz[m + 1], hi = edge_hz[m + 2];
    fb.centers_hz[m] = mid;
    double* row = fb.weights.row(m);
    for (int k = 0; k < bins; ++k) {
      const double f = k * df;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      row[k] = std::max(0.0, std::min(up, down));
    }
    double sum = 0.0;
    for (int k = 0; k < bins; ++k) sum += row[k];
    if (sum <= 0.0) {
      // Filter narrower than the bin spacing: fall back to the nearest bin
      // so every row stays usable.
      const int k = std::clamp(static_cast<int>(std::lround(mid / df)), 0,
                               bins - 1);
      row[k] = 1.0;
      sum = 1.0;
    }
    const double scale = 1.0 / (sum * df);
    for (int k = 0; k < bins; ++k) row[k] *= scale;
  }
  return fb;
}

}  // namespace uti2speech
