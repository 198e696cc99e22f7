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

#include "uti2speech/contf0.hpp"

#include <algorithm>
#include <cmath>

#include "uti2speech/stft.hpp"

namespace uti2speech {

namespace {

// Candidate periodicity evidence for one frame.
struct F0Observation {
  double log_f0 = 0.0;
  double confidence = 0.0;  // 0 = no usable candidate
};

constexpr int kNccWindow = 512;      // correlation window length
constexpr int kSegment = 1024;       // extracted segment (window + max lag)
constexpr double kMinPeakNcc = 0.30; // below this a frame contributes nothing
constexpr double kLagTolerance = 0.90;  // prefer the shortest strong lag

F0Observation frame_observation(const std::vector<double>& seg, int lag_min,
                                int lag_max, int sample_rate) {
  // Normalized cross-correlation from the segment start.
  std::vector<double> ncc(static_cast<size_t>(lag_max) + 1, 0.0);
  double energy0 = 1e-20;
  for (int n = 0; n < kNccWindow; ++n) energy0 += seg[n] * seg[n];
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    double dot = 0.0, energy = 1e-20;
    for (int n = 0; n < kNccWindow; ++n) {
      dot += seg[n] * seg[n + lag];
      energy += seg[n + lag] * seg[n + lag];
    }
    ncc[lag] = dot / std::sqrt(energy0 * energy);
  }

  double best = 0.0;
  for (int lag = lag_min; lag <= lag_max; ++lag) best = std::max(best, ncc[lag]);
  F0Observation obs;
  if (best < kMinPeakNcc) return obs;

  // Shortest local maximum within tolerance of the best peak; this keeps
  // period-doubled subharmonics from winning.
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    const bool local_max =
        (lag == lag_min || ncc[lag] >= ncc[lag - 1]) &&
        (lag == lag_max || ncc[lag] >= ncc[lag + 1]);
    if (!local_max || ncc[lag] < kLagTolerance * best) continue;
    double refined = lag;
    if (lag > lag_min && lag < lag_max) {
      const double denom = ncc[lag - 1] - 2.0 * ncc[lag] + ncc[lag + 1];
      if (std::fabs(denom) > 1e-12) {
        const double delta = 0.5 * (ncc[lag - 1] - ncc[lag + 1]) / denom;
        if (std::fabs(delta) <= 0.5) refined = lag + delta;
      }
    }
    const double f0 =
        std::clamp(sample_rate / refined, kF0Min, kF0Max);
    obs.log_f0 = std::log(f0);
    obs.confidence = std::clamp(ncc[lag], 0.0, 1.0);
    obs.confidence *= obs.confidence;
    return obs;
  }
  return obs;
}

}  // namespace

std::vector<double> track_contf0(const Waveform& wav, int hop) {
  require_standard_rate(wav);
  require(wav.size() >= 1, "empty-signal", "cannot track empty signal");
  const int n = wav.size();
  const int frames = stft_frame_count(n, hop);
  const int lag_min = static_cast<int>(wav.sample_rate / kF0Max);
  const int lag_max = static_cast<int>(std::ceil(wav.sample_rate / kF0Min));

  std::vector<F0Observation> obs(static_cast<size_t>(frames));
  std::vector<double> seg(static_cast<size_t>(kSegment));
  for (int t = 0; t < frames; ++t) {
    // Keep the correlation segment inside the signal whenever it fits;
    // reflected edge content is time-reversed and corrupts the lags.
    int start = t * hop - kNccWindow / 2;
    if (n >= kSegment) start = std::clamp(start, 0, n - kSegment);
    for (int i = 0; i < kSegment; ++i)
      seg[i] = wav.samples[reflect_index(start + i, n)];
    obs[t] = frame_observation(seg, lag_min, lag_max, wav.sample_rate);
  }

  // Prior: confidence-weighted mean of the observations.
  double prior = std::log(150.0);
  {
    double acc = 0.0, wsum = 0.0;
    for (const auto& o : obs) {
      acc += o.confidence * o.log_f0;
      wsum += o.confidence;
    }
    if (wsum > 1e-6) prior = acc / wsum;
  }

  // Forward Kalman pass on a random-walk log-F0 state.
  constexpr double kProcessVar = 0.002;   // per-frame transition variance
  constexpr double kObsVarBase = 0.0025;  // at confidence 1
  std::vector<double> mean_f(frames), var_f(frames);
  std::vector<double> mean_p(frames), var_p(frames);  // predicted
  double m = prior, p = 0.25;
  for (int t = 0; t < frames; ++t) {
    if (t > 0) p += kProcessVar;
    mean_p[t] = m;
    var_p[t] = p;
    if (obs[t].confidence > 1e-6) {
      const double r = kObsVarBase / obs[t].confidence;
      const double gain = p / (p + r);
      m += gain * (obs[t].log_f0 - m);
      p *= (1.0 - gain);
    }
    mean_f[t] = m;
    var_f[t] = p;
  }

  // Rauch-Tung-Striebel backward smoothing.
  std::vector<double> out(static_cast<size_t>(frames));
  out[frames - 1] = mean_f[frames - 1];
  for (int t = frames - 2; t >= 0; --t) {
    const double c = var_f[t] / var_p[t + 1];
    out[t] = mean_f[t] + c * (out[t + 1] - mean_f[t + 1]);
  }

  for (double& v : out) v = std::clamp(v, std::log(kF0Min), std::log(kF0Max));
  // Slew limiting, applied both directions so neither end is favored.
  for (int t = 1; t < frames; ++t)
    out[t] = std::clamp(out[t], out[t - 1] - kF0MaxLogStep,
                        out[t - 1] + kF0MaxLogStep);
  for (int t = frames - 2; t >= 0; --t)
    out[t] = std::clamp(out[t], out[t + 1] - kF0MaxLogStep,
                        out[t + 1] + kF0MaxLogStep);
  return out;
}

}  // namespace uti2speech
