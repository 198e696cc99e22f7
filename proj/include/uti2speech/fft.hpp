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

#include <complex>
#include <vector>

namespace uti2speech {

// Iterative radix-2 FFT, power-of-two sizes only.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse);

// Real input of length n (zero-padded to nfft), one-sided output of
// nfft/2 + 1 bins.
std::vector<std::complex<double>> rfft(const double* x, int n, int nfft);

// Inverse of rfft; reconstructs nfft real samples from nfft/2 + 1 bins.
std::vector<double> irfft(const std::complex<double>* spec, int nfft);

}  // namespace uti2speech
