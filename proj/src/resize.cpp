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

#include "uti2speech/resize.hpp"

#include <algorithm>
#include <cmath>

namespace uti2speech {

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

// One separable pass along the column axis: src is rows x cols, output is
// rows x out_cols.
MatD resize_cols(const MatD& src, int out_cols) {
  MatD out(src.rows, out_cols);
  const double scale = static_cast<double>(src.cols) / out_cols;
  std::vector<int> idx(static_cast<size_t>(out_cols) * 4);
  std::vector<double> w(static_cast<size_t>(out_cols) * 4);
  for (int x = 0; x < out_cols; ++x) {
    const double sx = (x + 0.5) * scale - 0.5;
    const int base = static_cast<int>(std::floor(sx)) - 1;
    for (int k = 0; k < 4; ++k) {
      idx[4 * x + k] = std::clamp(base + k, 0, src.cols - 1);
      w[4 * x + k] = cubic_kernel(sx - (base + k));
    }
  }
  for (int r = 0; r < src.rows; ++r) {
    const double* in = src.row(r);
    double* o = out.row(r);
    for (int x = 0; x < out_cols; ++x) {
      const int* ix = &idx[4 * x];
      const double* wx = &w[4 * x];
      o[x] = wx[0] * in[ix[0]] + wx[1] * in[ix[1]] + wx[2] * in[ix[2]] +
             wx[3] * in[ix[3]];
    }
  }
  return out;
}

MatD transpose(const MatD& m) {
  MatD out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out.at(c, r) = m.at(r, c);
  return out;
}

}  // namespace

MatD resize_bicubic(const MatD& src, int out_rows, int out_cols) {
  require(src.rows >= 4 && src.cols >= 4, "too-small-input",
          "source must be at least 4x4, got " + std::to_string(src.rows) +
              "x" + std::to_string(src.cols));
  require(out_rows >= 1 && out_cols >= 1, "invalid-input",
          "output dimensions must be positive");
  MatD tmp = resize_cols(src, out_cols);
  return transpose(resize_cols(transpose(tmp), out_rows));
}

MatF resize_frame(const uint8_t* data, int rows, int cols) {
  MatD src(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      src.at(r, c) = data[static_cast<size_t>(r) * cols + c] / 255.0;
  MatD resized = resize_bicubic(src, kImageRows, kImageCols);
  MatF out(kImageRows, kImageCols);
  for (int r = 0; r < kImageRows; ++r)
    for (int c = 0; c < kImageCols; ++c)
      out.at(r, c) = static_cast<float>(std::clamp(resized.at(r, c), 0.0, 1.0));
  return out;
}

}  // namespace uti2speech
