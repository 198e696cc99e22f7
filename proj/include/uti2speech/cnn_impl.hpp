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

// Template implementation of the CNN forward/backward pass; included at
// the end of cnn.hpp. The float instantiation is the production model,
// the double one backs the finite-difference test build.

#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace uti2speech {

namespace cnn_detail {

template <typename S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using EMap = Eigen::Map<EMat<S>>;
template <typename S>
using ECMap = Eigen::Map<const EMat<S>>;

// Deterministic uniform in [0, 1); avoids the implementation-defined
// std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename S>
S swish(S x) {
  return x / (S(1) + std::exp(-x));
}

template <typename S>
S swish_grad(S x) {
  const S sig = S(1) / (S(1) + std::exp(-x));
  return sig + x * sig * (S(1) - sig);
}

// Channels-major image block: rows = channels, cols = H*W.
template <typename S>
struct LayerCache {
  Matrix<S> x0;                        // network input, 1 x (H*W)
  std::array<Matrix<S>, 4> pre;        // conv preactivations
  std::array<Matrix<S>, 4> post;       // after activation + dropout
  std::array<Matrix<S>, 4> mask;       // dropout masks (0 or 1/(1-p))
  std::array<Matrix<S>, 4> col;        // im2col inputs, reused by backward
  Matrix<S> pooled2, pooled4;          // after the two pools
  std::vector<int> argmax2, argmax4;   // source index per pooled cell
  std::vector<S> flat;                 // pooled4 flattened
  std::vector<S> fc_pre, fc_post, fc_mask;
  std::vector<S> output;
  bool valid = false;
};

// Fills `col` (resized in place so repeated calls reuse the buffer). The
// interior of each (channel, ky, kx) row is one contiguous source run,
// copied as such; only the padding border is handled separately.
template <typename S>
void im2col(const Matrix<S>& in, int height, int width, int kernel,
            Matrix<S>& col) {
  const int channels = in.rows;
  const int pad = kernel / 2;
  col.rows = channels * kernel * kernel;
  col.cols = height * width;
  col.data.resize(static_cast<size_t>(col.rows) * col.cols);
  for (int c = 0; c < channels; ++c) {
    const S* src = in.row(c);
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        S* dst = col.row((c * kernel + ky) * kernel + kx);
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(width, width + pad - kx);
        for (int y = 0; y < height; ++y) {
          S* row = dst + static_cast<size_t>(y) * width;
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= height) {
            std::fill(row, row + width, S(0));
            continue;
          }
          std::fill(row, row + x_lo, S(0));
          const S* srow = src + static_cast<size_t>(sy) * width + (kx - pad);
          std::copy(srow + x_lo, srow + x_hi, row + x_lo);
          std::fill(row + x_hi, row + width, S(0));
        }
      }
    }
  }
}

template <typename S>
void col2im_accumulate(const Matrix<S>& col, int height, int width,
                       int kernel, Matrix<S>& out) {
  const int channels = out.rows;
  const int pad = kernel / 2;
  for (int c = 0; c < channels; ++c) {
    S* dst = out.row(c);
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const S* src = col.row((c * kernel + ky) * kernel + kx);
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(width, width + pad - kx);
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= height) continue;
          const S* row = src + static_cast<size_t>(y) * width;
          S* drow = dst + static_cast<size_t>(sy) * width + (kx - pad);
          for (int x = x_lo; x < x_hi; ++x) drow[x] += row[x];
        }
      }
    }
  }
}

// 2x2 max pooling, first-index tie break (strict > keeps the earliest).
template <typename S>
Matrix<S> maxpool2(const Matrix<S>& in, int height, int width,
                   std::vector<int>* argmax) {
  const int channels = in.rows;
  const int oh = height / 2, ow = width / 2;
  Matrix<S> out(channels, oh * ow);
  if (argmax) argmax->assign(static_cast<size_t>(channels) * oh * ow, 0);
  for (int c = 0; c < channels; ++c) {
    const S* src = in.row(c);
    S* dst = out.row(c);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best_idx = (2 * y) * width + 2 * x;
        S best = src[best_idx];
        const int cand[3] = {(2 * y) * width + 2 * x + 1,
                             (2 * y + 1) * width + 2 * x,
                             (2 * y + 1) * width + 2 * x + 1};
        for (int idx : cand) {
          if (src[idx] > best) {
            best = src[idx];
            best_idx = idx;
          }
        }
        dst[y * ow + x] = best;
        if (argmax)
          (*argmax)[(static_cast<size_t>(c) * oh + y) * ow + x] = best_idx;
      }
    }
  }
  return out;
}

}  // namespace cnn_detail

template <typename S>
CnnModelT<S>::CnnModelT(const CnnArchitecture& a) : arch(a) {
  arch.validate();
  int in_ch = 1;
  for (int l = 0; l < 4; ++l) {
    conv_w[l] = Matrix<S>(arch.conv_filters[l],
                          in_ch * arch.kernel * arch.kernel);
    conv_b[l].assign(arch.conv_filters[l], S(0));
    in_ch = arch.conv_filters[l];
  }
  fc_w = Matrix<S>(arch.fc_units, arch.flat_dim());
  fc_b.assign(arch.fc_units, S(0));
  out_w = Matrix<S>(arch.output_dim, arch.fc_units);
  out_b.assign(arch.output_dim, S(0));
}

template <typename S>
void CnnModelT<S>::init_weights(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](Matrix<S>& w, int fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& v : w.data)
      v = static_cast<S>((2.0 * cnn_detail::unit_uniform(rng) - 1.0) * limit);
  };
  for (int l = 0; l < 4; ++l) fill(conv_w[l], conv_w[l].cols);
  fill(fc_w, fc_w.cols);
  fill(out_w, out_w.cols);
  for (auto& b : conv_b) std::fill(b.begin(), b.end(), S(0));
  std::fill(fc_b.begin(), fc_b.end(), S(0));
  std::fill(out_b.begin(), out_b.end(), S(0));
  trained = false;
}

namespace cnn_detail {

// Shared forward pass; in train mode fills the cache and applies dropout.
template <typename S>
std::vector<S> run_forward(const CnnModelT<S>& model, const S* image,
                           bool train_mode, std::mt19937_64* rng,
                           LayerCache<S>* cache) {
  const auto& arch = model.arch;
  const int h = arch.input_rows, w = arch.input_cols;
  const S keep = S(1) - static_cast<S>(arch.dropout);

  Matrix<S> x(1, h * w);
  std::copy(image, image + h * w, x.data.begin());
  if (cache) cache->x0 = x;

  auto activate = [&](Matrix<S>& t, Matrix<S>* pre, Matrix<S>* mask) {
    if (pre) *pre = t;
    if (arch.activation == Activation::kSwish)
      for (auto& v : t.data) v = swish(v);
    if (train_mode && arch.dropout > 0.0f) {
      if (mask) *mask = Matrix<S>(t.rows, t.cols);
      for (size_t i = 0; i < t.data.size(); ++i) {
        const bool keep_it = unit_uniform(*rng) >= arch.dropout;
        const S m = keep_it ? S(1) / keep : S(0);
        if (mask) mask->data[i] = m;
        t.data[i] *= m;
      }
    }
  };

  // Column scratch: the cache owns it in train mode so backward can reuse
  // the exact matrices; eval mode keeps one thread-local set to avoid
  // re-allocating hundreds of MB per frame.
  thread_local std::array<Matrix<S>, 4> eval_cols;
  auto& cols = cache ? cache->col : eval_cols;

  int cur_h = h, cur_w = w;
  Matrix<S> cur = x;
  for (int l = 0; l < 4; ++l) {
    Matrix<S>& col = cols[l];
    im2col(cur, cur_h, cur_w, arch.kernel, col);
    Matrix<S> conv(arch.conv_filters[l], cur_h * cur_w);
    EMap<S>(conv.data.data(), conv.rows, conv.cols).noalias() =
        ECMap<S>(model.conv_w[l].data.data(), model.conv_w[l].rows,
                 model.conv_w[l].cols) *
        ECMap<S>(col.data.data(), col.rows, col.cols);
    for (int f = 0; f < conv.rows; ++f) {
      S* row = conv.row(f);
      for (int i = 0; i < conv.cols; ++i) row[i] += model.conv_b[l][f];
    }
    activate(conv, cache ? &cache->pre[l] : nullptr,
             cache ? &cache->mask[l] : nullptr);
    if (cache) cache->post[l] = conv;
    if (l == 1 || l == 3) {
      auto pooled = maxpool2(conv, cur_h, cur_w,
                             cache ? (l == 1 ? &cache->argmax2 : &cache->argmax4)
                                   : nullptr);
      cur_h /= 2;
      cur_w /= 2;
      cur = std::move(pooled);
      if (cache) (l == 1 ? cache->pooled2 : cache->pooled4) = cur;
    } else {
      cur = std::move(conv);
    }
  }

  // Flatten, fully connected, output.
  std::vector<S> flat(cur.data.begin(), cur.data.end());
  if (cache) cache->flat = flat;
  std::vector<S> fc(arch.fc_units);
  {
    ECMap<S> wmap(model.fc_w.data.data(), model.fc_w.rows, model.fc_w.cols);
    Eigen::Map<Eigen::Vector<S, Eigen::Dynamic>> fcv(fc.data(), fc.size());
    Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> fl(flat.data(),
                                                          flat.size());
    fcv.noalias() = wmap * fl;
  }
  for (int i = 0; i < arch.fc_units; ++i) fc[i] += model.fc_b[i];
  if (cache) cache->fc_pre = fc;
  if (arch.activation == Activation::kSwish)
    for (auto& v : fc) v = swish(v);
  if (train_mode && arch.dropout > 0.0f) {
    if (cache) cache->fc_mask.resize(fc.size());
    for (size_t i = 0; i < fc.size(); ++i) {
      const bool keep_it = unit_uniform(*rng) >= arch.dropout;
      const S m = keep_it ? S(1) / keep : S(0);
      if (cache) cache->fc_mask[i] = m;
      fc[i] *= m;
    }
  }
  if (cache) cache->fc_post = fc;

  std::vector<S> out(arch.output_dim);
  {
    ECMap<S> wmap(model.out_w.data.data(), model.out_w.rows, model.out_w.cols);
    Eigen::Map<Eigen::Vector<S, Eigen::Dynamic>> ov(out.data(), out.size());
    Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> fcv(fc.data(),
                                                           fc.size());
    ov.noalias() = wmap * fcv;
  }
  for (int i = 0; i < arch.output_dim; ++i) out[i] += model.out_b[i];
  if (cache) {
    cache->output = out;
    cache->valid = true;
  }
  return out;
}

}  // namespace cnn_detail

template <typename S>
std::vector<S> CnnModelT<S>::forward(const S* image) const {
  return cnn_detail::run_forward<S>(*this, image, false, nullptr, nullptr);
}

template <typename S>
std::vector<S> CnnModelT<S>::forward_train(
    const S* image, std::mt19937_64& rng,
    cnn_detail::LayerCache<S>& cache) const {
  return cnn_detail::run_forward(*this, image, true, &rng, &cache);
}

template <typename S>
void CnnModelT<S>::Gradients::init(const CnnArchitecture& a) {
  int in_ch = 1;
  for (int l = 0; l < 4; ++l) {
    conv_w[l] = Matrix<S>(a.conv_filters[l], in_ch * a.kernel * a.kernel);
    conv_b[l].assign(a.conv_filters[l], S(0));
    in_ch = a.conv_filters[l];
  }
  fc_w = Matrix<S>(a.fc_units, a.flat_dim());
  fc_b.assign(a.fc_units, S(0));
  out_w = Matrix<S>(a.output_dim, a.fc_units);
  out_b.assign(a.output_dim, S(0));
}

template <typename S>
void CnnModelT<S>::Gradients::accumulate(const Gradients& other, S scale) {
  for (int l = 0; l < 4; ++l) {
    for (size_t i = 0; i < conv_w[l].data.size(); ++i)
      conv_w[l].data[i] += scale * other.conv_w[l].data[i];
    for (size_t i = 0; i < conv_b[l].size(); ++i)
      conv_b[l][i] += scale * other.conv_b[l][i];
  }
  for (size_t i = 0; i < fc_w.data.size(); ++i)
    fc_w.data[i] += scale * other.fc_w.data[i];
  for (size_t i = 0; i < fc_b.size(); ++i) fc_b[i] += scale * other.fc_b[i];
  for (size_t i = 0; i < out_w.data.size(); ++i)
    out_w.data[i] += scale * other.out_w.data[i];
  for (size_t i = 0; i < out_b.size(); ++i) out_b[i] += scale * other.out_b[i];
}

template <typename S>
void CnnModelT<S>::backward(const cnn_detail::LayerCache<S>& cache,
                            const S* target, Gradients& grads) const {
  using namespace cnn_detail;
  require(cache.valid, "invalid-cache",
          "backward needs a cache from a train-mode forward");
  const int h = arch.input_rows, w = arch.input_cols;
  const int d_out = arch.output_dim;

  // dL/dy for L = mean squared error over the output dimensions.
  std::vector<S> dout(d_out);
  for (int i = 0; i < d_out; ++i)
    dout[i] = S(2) * (cache.output[i] - target[i]) / S(d_out);

  // Output layer.
  for (int i = 0; i < d_out; ++i) {
    grads.out_b[i] = dout[i];
    S* row = grads.out_w.row(i);
    for (int j = 0; j < arch.fc_units; ++j)
      row[j] = dout[i] * cache.fc_post[j];
  }
  std::vector<S> dfc(arch.fc_units, S(0));
  for (int i = 0; i < d_out; ++i) {
    const S* row = out_w.row(i);
    for (int j = 0; j < arch.fc_units; ++j) dfc[j] += row[j] * dout[i];
  }

  // Fully connected layer (through dropout and the activation).
  for (int j = 0; j < arch.fc_units; ++j) {
    if (!cache.fc_mask.empty()) dfc[j] *= cache.fc_mask[j];
    if (arch.activation == Activation::kSwish)
      dfc[j] *= swish_grad(cache.fc_pre[j]);
    grads.fc_b[j] = dfc[j];
    S* row = grads.fc_w.row(j);
    for (size_t i = 0; i < cache.flat.size(); ++i)
      row[i] = dfc[j] * cache.flat[i];
  }
  std::vector<S> dflat(cache.flat.size(), S(0));
  {
    ECMap<S> wmap(fc_w.data.data(), fc_w.rows, fc_w.cols);
    Eigen::Map<Eigen::Vector<S, Eigen::Dynamic>> dfl(dflat.data(),
                                                     dflat.size());
    Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> dv(dfc.data(),
                                                          dfc.size());
    dfl.noalias() = wmap.transpose() * dv;
  }

  // Walk the conv stack backwards; spatial sizes per layer.
  const int sizes_h[4] = {h, h, h / 2, h / 2};
  const int sizes_w[4] = {w, w, w / 2, w / 2};

  // Gradient flowing into the post-activation output of each stage.
  Matrix<S> dcur(arch.conv_filters[3],
                 (h / 4) * (w / 4));
  std::copy(dflat.begin(), dflat.end(), dcur.data.begin());

  for (int l = 3; l >= 0; --l) {
    const int lh = sizes_h[l], lw = sizes_w[l];
    if (l == 1 || l == 3) {
      // Un-pool: route each pooled gradient to its argmax source.
      const auto& argmax = (l == 1) ? cache.argmax2 : cache.argmax4;
      Matrix<S> up(arch.conv_filters[l], lh * lw);
      const int oh = lh / 2, ow = lw / 2;
      for (int c = 0; c < up.rows; ++c) {
        const S* src = dcur.row(c);
        S* dst = up.row(c);
        for (int i = 0; i < oh * ow; ++i)
          dst[argmax[static_cast<size_t>(c) * oh * ow + i]] += src[i];
      }
      dcur = std::move(up);
    }
    // Through dropout and activation.
    if (!cache.mask[l].data.empty())
      for (size_t i = 0; i < dcur.data.size(); ++i)
        dcur.data[i] *= cache.mask[l].data[i];
    if (arch.activation == Activation::kSwish)
      for (size_t i = 0; i < dcur.data.size(); ++i)
        dcur.data[i] *= swish_grad(cache.pre[l].data[i]);

    // Weight/bias gradients from the forward pass's cached column matrix.
    const Matrix<S>& col = cache.col[l];
    EMap<S>(grads.conv_w[l].data.data(), grads.conv_w[l].rows,
            grads.conv_w[l].cols)
        .noalias() = ECMap<S>(dcur.data.data(), dcur.rows, dcur.cols) *
                     ECMap<S>(col.data.data(), col.rows, col.cols).transpose();
    for (int f = 0; f < dcur.rows; ++f) {
      S acc = S(0);
      const S* row = dcur.row(f);
      for (int i = 0; i < dcur.cols; ++i) acc += row[i];
      grads.conv_b[l][f] = acc;
    }
    if (l == 0) break;

    // Gradient w.r.t. the layer input.
    const Matrix<S>& input = (l == 1)   ? cache.post[0]
                             : (l == 2) ? cache.pooled2
                                        : cache.post[2];
    thread_local Matrix<S> dcol;
    dcol.rows = col.rows;
    dcol.cols = col.cols;
    dcol.data.resize(static_cast<size_t>(col.rows) * col.cols);
    EMap<S>(dcol.data.data(), dcol.rows, dcol.cols).noalias() =
        ECMap<S>(conv_w[l].data.data(), conv_w[l].rows, conv_w[l].cols)
            .transpose() *
        ECMap<S>(dcur.data.data(), dcur.rows, dcur.cols);
    Matrix<S> dinput(input.rows, input.cols);
    col2im_accumulate(dcol, lh, lw, arch.kernel, dinput);
    dcur = std::move(dinput);
  }
}

template <typename S>
void CnnModelT<S>::sgd_step(const Gradients& grads, S learning_rate) {
  for (int l = 0; l < 4; ++l) {
    for (size_t i = 0; i < conv_w[l].data.size(); ++i)
      conv_w[l].data[i] -= learning_rate * grads.conv_w[l].data[i];
    for (size_t i = 0; i < conv_b[l].size(); ++i)
      conv_b[l][i] -= learning_rate * grads.conv_b[l][i];
  }
  for (size_t i = 0; i < fc_w.data.size(); ++i)
    fc_w.data[i] -= learning_rate * grads.fc_w.data[i];
  for (size_t i = 0; i < fc_b.size(); ++i)
    fc_b[i] -= learning_rate * grads.fc_b[i];
  for (size_t i = 0; i < out_w.data.size(); ++i)
    out_w.data[i] -= learning_rate * grads.out_w.data[i];
  for (size_t i = 0; i < out_b.size(); ++i)
    out_b[i] -= learning_rate * grads.out_b[i];
}

template <typename S>
size_t CnnModelT<S>::parameter_count() const {
  size_t n = fc_w.data.size() + fc_b.size() + out_w.data.size() + out_b.size();
  for (int l = 0; l < 4; ++l) n += conv_w[l].data.size() + conv_b[l].size();
  return n;
}

}  // namespace uti2speech
