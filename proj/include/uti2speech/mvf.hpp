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

constexpr double kMvfMin = 500.0;
constexpr double kMvfMax = 11025.0;
constexpr double kMvfProminenceDb = 6.0;

// Per-frame log maximum voiced frequency. Harmonics at k*f0 are scored by
// band-averaged peak power against the worse of the two half-way valleys;
// the voiced band ends at the last contiguous pair of harmonics clearing
// the prominence threshold. Median-filtered over 5 frames and clamped to
// [kMvfMin, kMvfMax], so a valid value is always produced.
std::vector<double> estimate_mvf(const Waveform& wav,
                                 const std::vector<double>& log_f0,
                                 int hop = kHopSamples);

}  // namespace uti2speech
