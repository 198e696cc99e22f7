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

#include "uti2speech/common.hpp"
#include "uti2speech/mgc.hpp"

namespace uti2speech {

// Per-frame continuous-vocoder parameters: log gain + 24 LSPs for the
// spectral envelope, log continuous F0 and log maximum voiced frequency
// for the excitation, at a fixed 270-sample hop.
struct ContParams {
  int order = 24;
  std::vector<double> gain;     // natural log of linear gain
  std::vector<double> log_f0;   // ln Hz, in [ln 50, ln 400]
  std::vector<double> log_mvf;  // ln Hz, in [ln 500, ln 11025]
  MatD lsp;                     // frames x order, ascending in (0, pi)

  int frames() const { return static_cast<int>(gain.size()); }
};

// Throws "invalid-params" when any invariant is violated.
void validate_params(const ContParams& params);

// Full analysis: MGC-LSP envelope + continuous F0 + MVF.
ContParams analyze_utterance(const Waveform& wav, const MgcConfig& cfg = {});

// Pitch-synchronous residual excitation, MVF-split voiced/noise mix,
// MGLSA cascade synthesis. Output is exactly frames * hop samples and is
// deterministic for a fixed noise seed.
Waveform synthesize(const ContParams& params, const MgcConfig& cfg = {},
                    uint64_t noise_seed = 1);

// Feature-matrix views for network training: spectral block is
// [gain, lsp x order] (25 dims), excitation block is [log_f0, log_mvf].
MatF contparams_to_spectral(const ContParams& params);
MatF contparams_to_excitation(const ContParams& params);
// Rebuild parameters from predicted blocks; predicted values are projected
// back into the valid region (ascending LSPs with a minimum gap, clamped
// F0/MVF) so synthesis preconditions always hold.
ContParams features_to_contparams(const MatF& spectral,
                                  const MatF& excitation);

// "CVP1": magic, frames, order as LE int32, then per-frame float32
// records [gain, lsp x order, log_f0, log_mvf].
void write_contparams(const std::string& path, const ContParams& params);
ContParams read_contparams(const std::string& path);

}  // namespace uti2speech
