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

// Mel-cepstral distortion in dB between two T x (order+1) cepstrum
// sequences: frame mean of (10/ln10) * sqrt(2 * sum_d (a_d - b_d)^2) over
// d = 1..order; the energy coefficient c0 is excluded. Frame counts must
// match (callers align/truncate).
double mcd(const MatD& ref, const MatD& test);

// Order-24 mel-cepstra (gamma = 0, alpha = 0.455) at the standard hop.
MatD waveform_to_melcepstra(const Waveform& wav);

struct McdReport {
  std::vector<std::string> utterance;
  std::vector<double> value_db;
  std::vector<int> frames_used;
  double mean_db = 0.0;
};
void write_mcd_report(const std::string& path, const McdReport& report);

// Mann-Whitney-Wilcoxon ranksum with mid-rank ties. Exact enumeration of
// the U distribution below kRanksumExactLimit per group, tie-corrected
// normal approximation with continuity correction otherwise.
constexpr int kRanksumExactLimit = 8;

struct RanksumResult {
  double u = 0.0;        // U statistic of the first sample
  double p = 1.0;        // two-sided
  bool significant = false;  // p < 0.05
  bool exact = false;
};
RanksumResult ranksum_test(const std::vector<double>& a,
                           const std::vector<double>& b);

// MUSHRA-style listening scores, CSV rows "listener,system,sentence,score".
struct MushraScores {
  struct Row {
    std::string listener;
    std::string system;
    std::string sentence;
    int score = 0;
  };
  std::vector<Row> rows;

  std::vector<std::string> systems() const;
  std::vector<double> scores_for(const std::string& system) const;
};
MushraScores read_mushra_csv(const std::string& path);

// Pairwise TSV report: system_a, system_b, U, p, significant@0.05.
void write_mushra_report(const std::string& path, const MushraScores& scores);

}  // namespace uti2speech
