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

#include "uti2speech/fft.hpp"

#include <cmath>

#include "uti2speech/common.hpp"

namespace uti2speech {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

void fft_inplace(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  require(is_pow2(n), "invalid-fft-size",
          "FFT size must be a power of two, got " + std::to_string(n));
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) *
                       (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv_n;
  }
}

std::vector<std::complex<double>> rfft(const double* x, int n, int nfft) {
  std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
  const int m = n < nfft ? n : nfft;
  for (int i = 0; i < m; ++i) buf[i] = std::complex<double>(x[i], 0.0);
  fft_inplace(buf, false);
  buf.resize(static_cast<size_t>(nfft) / 2 + 1);
  return buf;
}

std::vector<double> irfft(const std::complex<double>* spec, int nfft) {
  std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
  const int half = nfft / 2;
  for (int k = 0; k <= half; ++k) buf[k] = spec[k];
  for (int k = 1; k < half; ++k) buf[nfft - k] = std::conj(spec[k]);
  fft_inplace(buf, true);
  std::vector<double> out(static_cast<size_t>(nfft));
  for (int i = 0; i < nfft; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace uti2speech
