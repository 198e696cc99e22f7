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

#include <vector>

#include "uti2speech/common.hpp"

namespace uti2speech {

// Mel-generalized cepstral analysis configuration. gamma = -1/3 keeps the
// synthesis filter realizable as a 3-stage cascade and the spectral part
// representable as line spectral pairs; gamma = 0 is the plain mel-cepstrum
// used by the MCD metric.
struct MgcConfig {
  int order = 24;
  double alpha = 0.455;
  double gamma = -1.0 / 3.0;
  int win_size = 2 * kHopSamples;
  int fft_size = 1024;
  int hop = kHopSamples;
  int max_iterations = 30;
  double tolerance = 1e-4;  // relative criterion change at convergence

  int stages() const {
    return gamma == 0.0 ? 0 : static_cast<int>(-1.0 / gamma + 0.5);
  }
};

// Silent-frame handling: frames with energy below kSilenceEnergy get all
// coefficients zeroed except a floored gain.
constexpr double kSilenceEnergy = 1e-10;
constexpr double kGainFloor = 1e-5;  // linear gain floor for silent frames
// Relative floor applied to the normalized periodogram before fitting
// (80 dB dynamic range; line spectra would otherwise dominate the
// criterion through their empty bins).
constexpr double kPeriodogramFloor = 1e-8;

// Warped frequency of the first-order all-pass at radian frequency omega.
double warp_frequency(double omega, double alpha);

// Fit one frame: minimizes the mel-generalized spectral criterion over the
// windowed periodogram by damped Gauss-Newton steps; returns order+1
// coefficients in the unnormalized representation (gain folded into c[0]).
std::vector<double> analyze_mgc_frame(const double* samples, int n,
                                      const MgcConfig& cfg);

// Frame-by-frame analysis at cfg.hop with a centered Hann window of
// cfg.win_size; T = floor(N/hop)+1 rows of order+1 coefficients.
MatD analyze_mgc(const Waveform& wav, const MgcConfig& cfg);

// Model log-amplitude spectrum at warped frequency grid points; used by
// the fitting loop and exposed for tests.
std::vector<double> mgc_log_spectrum(const std::vector<double>& mgc,
                                     const MgcConfig& cfg, int n_bins);

// --- representation transforms (gain-normalized <-> unnormalized, and
// generalized-cepstrum order/gamma changes) ---

// K = (1 + gamma*c[0])^(1/gamma); higher coefficients divided by
// 1 + gamma*c[0]. out[0] holds K.
std::vector<double> gnorm(const std::vector<double>& c, double gamma);
std::vector<double> ignorm(const std::vector<double>& c, double gamma);
// Generalized cepstral transform between gamma values (same warping).
std::vector<double> gc2gc(const std::vector<double>& c, double gamma_in,
                          int order_out, double gamma_out);

// Convert an mgc frame to the plain mel-cepstrum (gamma = 0, same alpha).
std::vector<double> mgc_to_mcep(const std::vector<double>& mgc,
                                const MgcConfig& cfg);

// --- line spectral pair form ---

struct LspFrame {
  double gain = 0.0;  // natural log of the linear gain K
  std::vector<double> lsp;
};

// Roots of the sum/difference polynomials of 1 + gamma*c'(z~) on the unit
// circle, located by a 4096-point grid scan plus bisection to 1e-10 rad.
// Throws "unstable-frame" when fewer than `order` roots are found.
LspFrame mgc_to_lsp(const std::vector<double>& mgc, const MgcConfig& cfg);
std::vector<double> lsp_to_mgc(const LspFrame& frame, const MgcConfig& cfg);

}  // namespace uti2speech
