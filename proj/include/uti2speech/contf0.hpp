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

// Search range and continuity limits of the continuous pitch tracker.
constexpr double kF0Min = 50.0;
constexpr double kF0Max = 400.0;
// Hard per-frame slew limit on log-F0 after smoothing.
constexpr double kF0MaxLogStep = 0.15;

// Continuous log-F0 contour, one value per frame at the given hop,
// defined (finite, in [kF0Min, kF0Max]) for every frame including
// unvoiced and silent regions. Normalized-autocorrelation candidates are
// fused by a forward-backward (Kalman + RTS) smoother on log-F0.
std::vector<double> track_contf0(const Waveform& wav, int hop = kHopSamples);

}  // namespace uti2speech
