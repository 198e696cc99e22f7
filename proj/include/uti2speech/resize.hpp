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

#include "uti2speech/common.hpp"

namespace uti2speech {

// Network input geometry.
constexpr int kImageRows = 64;
constexpr int kImageCols = 128;

// Keys cubic-convolution kernel with a = -0.5.
double cubic_kernel(double x);

// Separable bicubic resize with center-aligned sampling and clamped
// edges. Values are interpolated as-is (no range clamping), so affine
// intensity changes commute with the resize.
MatD resize_bicubic(const MatD& src, int out_rows, int out_cols);

// Resize one raw uint8 scanline frame to the 64x128 network input,
// scaled by 1/255 and clamped to [0, 1]. Throws "too-small-input" for
// sources smaller than 4x4.
MatF resize_frame(const uint8_t* data, int rows, int cols);

}  // namespace uti2speech
