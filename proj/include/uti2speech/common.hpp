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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uti2speech {

// Global rates. The frame shift ties the acoustic analysis to the
// ultrasound frame rate: 22050 Hz / 81.67 fps rounds to 270 samples.
constexpr int kSampleRate = 22050;
constexpr double kUltrasoundFps = 81.67;
constexpr int kHopSamples = 270;

inline int hop_from_rates(int sample_rate, double fps) {
  return static_cast<int>(sample_rate / fps + 0.5);
}

// Error with a stable machine-readable code ("malformed-container",
// "invalid-metadata", ...) next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message)
      : std::runtime_error(code + ": " + message),
        code_(std::move(code)),
        message_(std::move(message)) {}
  const std::string& code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  std::string code_;
  std::string message_;
};

[[noreturn]] inline void fail(const std::string& code,
                              const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, const std::string& code,
                    const std::string& message) {
  if (!cond) fail(code, message);
}

// Minimal dense row-major matrix. DSP paths use Matrix<double>, feature
// and model tensors use Matrix<float> (the on-disk precision).
template <typename T>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(int r, int c, T fill = T(0))
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const T& at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const T* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  bool empty() const { return rows == 0 || cols == 0; }
};

using MatF = Matrix<float>;
using MatD = Matrix<double>;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  int size() const { return static_cast<int>(samples.size()); }
};

inline void require_standard_rate(const Waveform& wav) {
  require(wav.sample_rate == kSampleRate, "invalid-sample-rate",
          "expected " + std::to_string(kSampleRate) + " Hz, got " +
              std::to_string(wav.sample_rate));
}

}  // namespace uti2speech
