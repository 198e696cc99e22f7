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

// Shared synthetic-signal builders and scratch-directory helpers.

#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "uti2speech/common.hpp"
#include "uti2speech/fft.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

inline uti2speech::Waveform sine(double freq_hz, double seconds,
                                 double amplitude = 0.5,
                                 int sr = uti2speech::kSampleRate) {
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  wav.samples.resize(n);
  for (int i = 0; i < n; ++i)
    wav.samples[i] = amplitude * std::sin(2.0 * kPi * freq_hz * i / sr);
  return wav;
}

inline uti2speech::Waveform sawtooth(double freq_hz, double seconds,
                                     double amplitude = 0.4,
                                     int sr = uti2speech::kSampleRate) {
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  wav.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    const double phase = std::fmod(freq_hz * i / sr, 1.0);
    wav.samples[i] = amplitude * (2.0 * phase - 1.0);
  }
  return wav;
}

// Linear chirp in frequency from f0 to f1.
inline uti2speech::Waveform chirp(double f0, double f1, double seconds,
                                  double amplitude = 0.4,
                                  int sr = uti2speech::kSampleRate) {
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  wav.samples.resize(n);
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = f0 + (f1 - f0) * i / n;
    wav.samples[i] = amplitude * std::sin(phase);
    phase += 2.0 * kPi * f / sr;
  }
  return wav;
}

inline uti2speech::Waveform white_noise(double seconds, double stddev,
                                        uint64_t seed,
                                        int sr = uti2speech::kSampleRate) {
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  wav.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, stddev);
  for (int i = 0; i < n; ++i) wav.samples[i] = gauss(rng);
  return wav;
}

// Harmonic complex: equal-amplitude cosines at k*f0 up to max_hz.
inline uti2speech::Waveform harmonic_complex(double f0, double max_hz,
                                             double seconds, double amplitude,
                                             int sr = uti2speech::kSampleRate) {
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  const int n = static_cast<int>(seconds * sr);
  wav.samples.resize(n, 0.0);
  for (int k = 1; k * f0 <= max_hz; ++k)
    for (int i = 0; i < n; ++i)
      wav.samples[i] += amplitude * std::cos(2.0 * kPi * k * f0 * i / sr);
  return wav;
}

// A vowel-like signal: impulse train at f0 through a few resonances.
inline uti2speech::Waveform synth_vowel(double f0, double seconds,
                                        int sr = uti2speech::kSampleRate) {
  const int n = static_cast<int>(seconds * sr);
  std::vector<double> exc(n, 0.0);
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    phase += f0 / sr;
    if (phase >= 1.0) {
      phase -= 1.0;
      exc[i] = 1.0;
    }
  }
  // Two-pole resonators at rough formant positions.
  uti2speech::Waveform wav;
  wav.sample_rate = sr;
  wav.samples.assign(n, 0.0);
  const double formants[3][2] = {{660.0, 0.985}, {1700.0, 0.975},
                                 {2400.0, 0.97}};
  for (const auto& f : formants) {
    const double r = f[1];
    const double theta = 2.0 * kPi * f[0] / sr;
    const double a1 = 2.0 * r * std::cos(theta);
    const double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = exc[i] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      wav.samples[i] += y;
    }
  }
  // Normalize to a sane RMS.
  double rms = 0.0;
  for (double s : wav.samples) rms += s * s;
  rms = std::sqrt(rms / n);
  if (rms > 0.0)
    for (double& s : wav.samples) s *= 0.15 / rms;
  return wav;
}

inline double dominant_frequency(const std::vector<double>& x, int sr) {
  // Zero-padded magnitude peak over a large FFT.
  int nfft = 1;
  while (nfft < static_cast<int>(x.size())) nfft <<= 1;
  nfft <<= 1;
  std::vector<double> re(nfft, 0.0), im(nfft, 0.0);
  for (size_t i = 0; i < x.size(); ++i) re[i] = x[i];
  // Goertzel-free direct DFT would be slow; reuse a simple radix-2 FFT here.
  std::vector<std::complex<double>> buf(nfft);
  for (int i = 0; i < nfft; ++i) buf[i] = {re[i], im[i]};
  uti2speech::fft_inplace(buf, false);
  int best = 1;
  double best_mag = 0.0;
  for (int k = 1; k <= nfft / 2; ++k) {
    const double m = std::abs(buf[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return static_cast<double>(best) * sr / nfft;
}

// Welch-averaged periodogram peak at the given FFT resolution; robust to
// slow phase drift across a signal (unlike one long FFT).
inline double welch_peak_hz(const std::vector<double>& x, int sr,
                            int nfft = 1024) {
  std::vector<double> acc(static_cast<size_t>(nfft) / 2 + 1, 0.0);
  std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
  int segments = 0;
  for (size_t start = 0; start + nfft <= x.size(); start += nfft / 2) {
    for (int i = 0; i < nfft; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * i / nfft);
      buf[i] = w * x[start + i];
    }
    uti2speech::fft_inplace(buf, false);
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(buf[k]);
    ++segments;
  }
  if (segments == 0) return 0.0;
  size_t best = 1;
  for (size_t k = 1; k < acc.size(); ++k)
    if (acc[k] > acc[best]) best = k;
  return static_cast<double>(best) * sr / nfft;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    base_ = std::filesystem::temp_directory_path() /
            ("uti2speech_" + tag + "_" + std::to_string(std::rand()));
    std::filesystem::create_directories(base_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(base_, ec);
  }
  std::string path(const std::string& name) const {
    return (base_ / name).string();
  }

 private:
  std::filesystem::path base_;
};

}  // namespace testutil
