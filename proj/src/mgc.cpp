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

#include "uti2speech/mgc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "uti2speech/fft.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Warped-basis tables shared across the frames of one utterance.
struct FitTables {
  int bins = 0;
  int order = 0;
  std::vector<double> weight;  // integration weights, mean-normalized
  MatD cos_t;                  // (order+1) x bins, cos(m * warped_omega)
  MatD sin_t;
  Eigen::LDLT<Eigen::MatrixXd> init_gram;  // for the LS initialization

  FitTables(const MgcConfig& cfg) {
    bins = cfg.fft_size / 2 + 1;
    order = cfg.order;
    weight.resize(bins);
    double wsum = 0.0;
    for (int k = 0; k < bins; ++k) {
      weight[k] = (k == 0 || k == bins - 1) ? 0.5 : 1.0;
      wsum += weight[k];
    }
    for (auto& w : weight) w /= wsum;
    cos_t = MatD(order + 1, bins);
    sin_t = MatD(order + 1, bins);
    for (int k = 0; k < bins; ++k) {
      const double omega = 2.0 * kPi * k / cfg.fft_size;
      const double warped = warp_frequency(omega, cfg.alpha);
      for (int m = 0; m <= order; ++m) {
        cos_t.at(m, k) = std::cos(m * warped);
        sin_t.at(m, k) = std::sin(m * warped);
      }
    }
    Eigen::MatrixXd gram(order + 1, order + 1);
    for (int m = 0; m <= order; ++m) {
      for (int nn = 0; nn <= m; ++nn) {
        double acc = 0.0;
        for (int k = 0; k < bins; ++k)
          acc += weight[k] * cos_t.at(m, k) * cos_t.at(nn, k);
        gram(m, nn) = gram(nn, m) = acc;
      }
    }
    for (int m = 0; m <= order; ++m) gram(m, m) += 1e-10;
    init_gram.compute(gram);
  }
};

// Weighted least-squares cepstral fit of half the log periodogram in the
// warped cosine basis; the Gauss-Newton refinement starts here.
std::vector<double> ls_initial_guess(const std::vector<double>& log_i,
                                     double gamma, const FitTables& t) {
  Eigen::VectorXd rhs(t.order + 1);
  for (int m = 0; m <= t.order; ++m) {
    double acc = 0.0;
    for (int k = 0; k < t.bins; ++k)
      acc += t.weight[k] * (0.5 * log_i[k]) * t.cos_t.at(m, k);
    rhs[m] = acc;
  }
  Eigen::VectorXd sol = t.init_gram.solve(rhs);
  std::vector<double> cep(sol.data(), sol.data() + t.order + 1);
  if (gamma == 0.0) return cep;
  auto norm = gnorm(cep, 0.0);
  auto gen = gc2gc(norm, 0.0, t.order, gamma);
  return ignorm(gen, gamma);
}

// ln|H|^2 on the grid for the current coefficients, plus the complex
// D(w) = 1 + gamma*C(w) when gamma != 0 (needed for the Jacobian).
void model_log_spectrum(const std::vector<double>& c, double gamma,
                        const FitTables& t, std::vector<double>& log_h2,
                        std::vector<double>& d_re, std::vector<double>& d_im) {
  const int m_max = static_cast<int>(c.size()) - 1;
  for (int k = 0; k < t.bins; ++k) {
    double re = 0.0, im = 0.0;
    for (int m = 0; m <= m_max; ++m) {
      re += c[m] * t.cos_t.at(m, k);
      im -= c[m] * t.sin_t.at(m, k);
    }
    if (gamma == 0.0) {
      log_h2[k] = 2.0 * re;
    } else {
      const double dr = 1.0 + gamma * re;
      const double di = gamma * im;
      d_re[k] = dr;
      d_im[k] = di;
      log_h2[k] = (1.0 / gamma) * std::log(std::max(dr * dr + di * di, 1e-24));
    }
  }
}

double criterion(const std::vector<double>& log_i,
                 const std::vector<double>& log_h2, const FitTables& t) {
  double acc = 0.0;
  for (int k = 0; k < t.bins; ++k) {
    const double r = log_i[k] - log_h2[k];
    acc += t.weight[k] * (std::exp(r) - r - 1.0);
  }
  return acc;
}

// One damped Gauss-Newton fit of the normalized periodogram. Returns the
// unnormalized coefficient vector (gain still relative to unit mean power).
std::vector<double> fit_frame(const std::vector<double>& log_i,
                              const MgcConfig& cfg, const FitTables& t) {
  const int m_coef = cfg.order + 1;
  std::vector<double> c = ls_initial_guess(log_i, cfg.gamma, t);
  std::vector<double> log_h2(t.bins), d_re(t.bins), d_im(t.bins);
  std::vector<double> jac(static_cast<size_t>(m_coef) * t.bins);

  model_log_spectrum(c, cfg.gamma, t, log_h2, d_re, d_im);
  double eps = criterion(log_i, log_h2, t);
  if (!std::isfinite(eps)) {
    std::fill(c.begin(), c.end(), 0.0);
    model_log_spectrum(c, cfg.gamma, t, log_h2, d_re, d_im);
    eps = criterion(log_i, log_h2, t);
  }

  Eigen::MatrixXd hess(m_coef, m_coef);
  Eigen::VectorXd grad(m_coef), step(m_coef);
  std::vector<double> trial(m_coef);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // Jacobian of ln|H|^2 w.r.t. each coefficient.
    for (int k = 0; k < t.bins; ++k) {
      if (cfg.gamma == 0.0) {
        for (int m = 0; m < m_coef; ++m)
          jac[static_cast<size_t>(m) * t.bins + k] = 2.0 * t.cos_t.at(m, k);
      } else {
        const double den = std::max(d_re[k] * d_re[k] + d_im[k] * d_im[k],
                                    1e-24);
        for (int m = 0; m < m_coef; ++m) {
          const double re = t.cos_t.at(m, k) * d_re[k] -
                            t.sin_t.at(m, k) * d_im[k];
          jac[static_cast<size_t>(m) * t.bins + k] = 2.0 * re / den;
        }
      }
    }
    hess.setZero();
    grad.setZero();
    for (int k = 0; k < t.bins; ++k) {
      const double r = log_i[k] - log_h2[k];
      const double er = std::exp(r);
      const double w = t.weight[k];
      for (int m = 0; m < m_coef; ++m) {
        const double jm = jac[static_cast<size_t>(m) * t.bins + k];
        grad[m] += w * (er - 1.0) * (-jm);
        for (int nn = 0; nn <= m; ++nn)
          hess(m, nn) += w * er * jm *
                         jac[static_cast<size_t>(nn) * t.bins + k];
      }
    }
    for (int m = 0; m < m_coef; ++m)
      for (int nn = m + 1; nn < m_coef; ++nn) hess(m, nn) = hess(nn, m);
    const double damp = 1e-9 * hess.trace() / m_coef + 1e-12;
    for (int m = 0; m < m_coef; ++m) hess(m, m) += damp;
    step = hess.ldlt().solve(-grad);

    // Backtracking line search on the criterion.
    double scale = 1.0;
    double eps_new = eps;
    bool improved = false;
    for (int bt = 0; bt < 24; ++bt) {
      for (int m = 0; m < m_coef; ++m) trial[m] = c[m] + scale * step[m];
      model_log_spectrum(trial, cfg.gamma, t, log_h2, d_re, d_im);
      eps_new = criterion(log_i, log_h2, t);
      if (std::isfinite(eps_new) && eps_new < eps) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      model_log_spectrum(c, cfg.gamma, t, log_h2, d_re, d_im);
      break;
    }
    c = trial;
    const double rel = std::fabs(eps - eps_new) / std::max(eps, 1e-12);
    eps = eps_new;
    if (rel < cfg.tolerance) break;
  }
  return c;
}

// The magnitude fit does not know about phase, so the optimizer can land
// on a spectrally-equivalent representation whose polynomial has roots
// outside the unit circle. Reflecting those roots to their reciprocals
// keeps |H| bit-for-bit in the gain parameter (a reciprocal flip scales
// the polynomial magnitude uniformly by 1/|r|) and makes the frame
// minimum phase, which the LSP form requires.
std::vector<double> enforce_minimum_phase(const std::vector<double>& c,
                                          double gamma) {
  const int order = static_cast<int>(c.size()) - 1;
  auto norm = gnorm(c, gamma);

  // Companion-matrix roots of z^M + a1 z^(M-1) + ... + aM.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(order, order);
  for (int m = 1; m <= order; ++m) companion(0, m - 1) = -gamma * norm[m];
  for (int m = 1; m < order; ++m) companion(m, m - 1) = 1.0;
  Eigen::VectorXcd roots = companion.eigenvalues();

  bool any_outside = false;
  double gain_scale = 1.0;
  for (int i = 0; i < order; ++i) {
    const double mag = std::abs(roots[i]);
    if (mag > 1.0 - 1e-9) {
      any_outside = true;
      // Reciprocal flip: |A| scales by 1/mag uniformly over the circle.
      // Roots essentially on the circle get nudged just inside; the
      // residual magnitude error there is O(1e-7).
      const double target = std::min(1.0 / std::max(mag, 1e-12), 1.0 - 1e-7);
      gain_scale *= mag;
      roots[i] *= target / mag;
    }
  }
  if (!any_outside) return c;

  // Rebuild the monic polynomial from the (conjugate-closed) root set.
  std::vector<std::complex<double>> poly{1.0};
  for (int i = 0; i < order; ++i) {
    poly.push_back(0.0);
    for (int m = static_cast<int>(poly.size()) - 1; m >= 1; --m)
      poly[m] -= roots[i] * poly[m - 1];
  }
  for (int m = 1; m <= order; ++m) norm[m] = poly[m].real() / gamma;
  norm[0] *= std::pow(gain_scale, 1.0 / gamma);
  return ignorm(norm, gamma);
}

std::vector<double> silent_frame(const MgcConfig& cfg) {
  std::vector<double> c(cfg.order + 1, 0.0);
  if (cfg.gamma == 0.0) {
    c[0] = std::log(kGainFloor);
  } else {
    c[0] = (std::pow(kGainFloor, cfg.gamma) - 1.0) / cfg.gamma;
  }
  return c;
}

// Rescale the fitted model by a linear gain factor (exact in the gain
// parameter, untouched higher coefficients in the normalized form).
std::vector<double> apply_gain(const std::vector<double>& c, double factor,
                               double gamma) {
  if (gamma == 0.0) {
    auto out = c;
    out[0] += std::log(factor);
    return out;
  }
  auto norm = gnorm(c, gamma);
  norm[0] *= factor;
  return ignorm(norm, gamma);
}

}  // namespace

double warp_frequency(double omega, double alpha) {
  return omega + 2.0 * std::atan2(alpha * std::sin(omega),
                                  1.0 - alpha * std::cos(omega));
}

std::vector<double> mgc_log_spectrum(const std::vector<double>& mgc,
                                     const MgcConfig& cfg, int n_bins) {
  std::vector<double> out(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    const double omega = kPi * k / (n_bins - 1);
    const double warped = warp_frequency(omega, cfg.alpha);
    double re = 0.0, im = 0.0;
    for (size_t m = 0; m < mgc.size(); ++m) {
      re += mgc[m] * std::cos(m * warped);
      im -= mgc[m] * std::sin(m * warped);
    }
    if (cfg.gamma == 0.0) {
      out[k] = re;
    } else {
      const double dr = 1.0 + cfg.gamma * re;
      const double di = cfg.gamma * im;
      out[k] = (0.5 / cfg.gamma) *
               std::log(std::max(dr * dr + di * di, 1e-24));
    }
  }
  return out;
}

std::vector<double> analyze_mgc_frame(const double* samples, int n,
                                      const MgcConfig& cfg) {
  FitTables tables(cfg);
  const auto window = hann_window(n);
  std::vector<double> buf(static_cast<size_t>(cfg.fft_size), 0.0);
  double energy = 0.0;
  double win_energy = 0.0;
  for (int i = 0; i < n; ++i) {
    buf[i] = window[i] * samples[i];
    energy += samples[i] * samples[i];
    win_energy += window[i] * window[i];
  }
  if (energy / n < kSilenceEnergy) return silent_frame(cfg);

  auto spec = rfft(buf.data(), cfg.fft_size, cfg.fft_size);
  std::vector<double> periodogram(tables.bins);
  double mean = 0.0;
  for (int k = 0; k < tables.bins; ++k) {
    periodogram[k] = std::norm(spec[k]) / win_energy;
    mean += tables.weight[k] * periodogram[k];
  }
  if (mean <= 0.0) return silent_frame(cfg);

  std::vector<double> log_i(tables.bins);
  for (int k = 0; k < tables.bins; ++k)
    log_i[k] =
        std::log(std::max(periodogram[k] / mean, kPeriodogramFloor));

  auto c = fit_frame(log_i, cfg, tables);
  if (cfg.gamma != 0.0) c = enforce_minimum_phase(c, cfg.gamma);
  return apply_gain(c, std::sqrt(mean), cfg.gamma);
}

MatD analyze_mgc(const Waveform& wav, const MgcConfig& cfg) {
  require_standard_rate(wav);
  require(wav.size() >= 1, "empty-signal", "cannot analyze empty signal");
  const int n = wav.size();
  const int frames = stft_frame_count(n, cfg.hop);
  FitTables tables(cfg);
  const auto window = hann_window(cfg.win_size);
  double win_energy = 0.0;
  for (double w : window) win_energy += w * w;

  MatD out(frames, cfg.order + 1);
  std::vector<double> buf(static_cast<size_t>(cfg.fft_size));
  for (int t = 0; t < frames; ++t) {
    const int start = t * cfg.hop - cfg.win_size / 2;
    std::fill(buf.begin(), buf.end(), 0.0);
    double energy = 0.0;
    for (int i = 0; i < cfg.win_size; ++i) {
      const double s = wav.samples[reflect_index(start + i, n)];
      buf[i] = window[i] * s;
      energy += s * s;
    }
    std::vector<double> c;
    if (energy / cfg.win_size < kSilenceEnergy) {
      c = silent_frame(cfg);
    } else {
      auto spec = rfft(buf.data(), cfg.fft_size, cfg.fft_size);
      std::vector<double> log_i(tables.bins);
      double mean = 0.0;
      for (int k = 0; k < tables.bins; ++k) {
        log_i[k] = std::norm(spec[k]) / win_energy;
        mean += tables.weight[k] * log_i[k];
      }
      if (mean <= 0.0) {
        c = silent_frame(cfg);
      } else {
        for (int k = 0; k < tables.bins; ++k)
          log_i[k] = std::log(std::max(log_i[k] / mean, kPeriodogramFloor));
        c = fit_frame(log_i, cfg, tables);
        if (cfg.gamma != 0.0) c = enforce_minimum_phase(c, cfg.gamma);
        c = apply_gain(c, std::sqrt(mean), cfg.gamma);
      }
    }
    for (int m = 0; m <= cfg.order; ++m) out.at(t, m) = c[m];
  }
  return out;
}

std::vector<double> gnorm(const std::vector<double>& c, double gamma) {
  std::vector<double> out(c.size());
  if (gamma == 0.0) {
    out[0] = std::exp(c[0]);
    for (size_t m = 1; m < c.size(); ++m) out[m] = c[m];
    return out;
  }
  const double k = 1.0 + gamma * c[0];
  require(k > 0.0, "invalid-params", "non-positive generalized gain");
  out[0] = std::pow(k, 1.0 / gamma);
  for (size_t m = 1; m < c.size(); ++m) out[m] = c[m] / k;
  return out;
}

std::vector<double> ignorm(const std::vector<double>& c, double gamma) {
  std::vector<double> out(c.size());
  if (gamma == 0.0) {
    out[0] = std::log(c[0]);
    for (size_t m = 1; m < c.size(); ++m) out[m] = c[m];
    return out;
  }
  const double k = std::pow(c[0], gamma);
  out[0] = (k - 1.0) / gamma;
  for (size_t m = 1; m < c.size(); ++m) out[m] = k * c[m];
  return out;
}

std::vector<double> gc2gc(const std::vector<double>& c, double gamma_in,
                          int order_out, double gamma_out) {
  const int m1 = static_cast<int>(c.size()) - 1;
  std::vector<double> out(static_cast<size_t>(order_out) + 1, 0.0);
  out[0] = c[0];
  for (int i = 1; i <= order_out; ++i) {
    double ss1 = 0.0, ss2 = 0.0;
    const int upper = std::min(m1, i - 1);
    for (int k = 1; k <= upper; ++k) {
      const int mk = i - k;
      if (mk > order_out) continue;
      const double cc = c[k] * out[mk];
      ss2 += k * cc;
      ss1 += mk * cc;
    }
    out[i] = (gamma_out * ss2 - gamma_in * ss1) / i;
    if (i <= m1) out[i] += c[i];
  }
  return out;
}

std::vector<double> mgc_to_mcep(const std::vector<double>& mgc,
                                const MgcConfig& cfg) {
  if (cfg.gamma == 0.0) return mgc;
  auto norm = gnorm(mgc, cfg.gamma);
  auto cep = gc2gc(norm, cfg.gamma, static_cast<int>(mgc.size()) - 1, 0.0);
  return ignorm(cep, 0.0);
}

namespace {

// Symmetric/antisymmetric evaluations of e^{j(M+1)w/2} A(e^{jw}) whose
// zeros on (0, pi) are the LSPs.
double lsp_even(const std::vector<double>& a, double omega) {
  const double h = 0.5 * (static_cast<double>(a.size()) + 1.0);
  double acc = std::cos(h * omega);
  for (size_t m = 0; m < a.size(); ++m)
    acc += a[m] * std::cos((h - static_cast<double>(m + 1)) * omega);
  return acc;
}

double lsp_odd(const std::vector<double>& a, double omega) {
  const double h = 0.5 * (static_cast<double>(a.size()) + 1.0);
  double acc = std::sin(h * omega);
  for (size_t m = 0; m < a.size(); ++m)
    acc += a[m] * std::sin((h - static_cast<double>(m + 1)) * omega);
  return acc;
}

template <typename F>
std::vector<double> scan_roots(F f, int grid, double tol) {
  std::vector<double> roots;
  double prev_w = kPi / grid * 1e-3;
  double prev_v = f(prev_w);
  for (int i = 1; i < grid; ++i) {
    const double w = kPi * i / grid;
    const double v = f(w);
    if (v == 0.0) {
      roots.push_back(w);
    } else if (prev_v * v < 0.0) {
      double lo = prev_w, hi = w, flo = prev_v;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_w = w;
    prev_v = v;
  }
  return roots;
}

}  // namespace

LspFrame mgc_to_lsp(const std::vector<double>& mgc, const MgcConfig& cfg) {
  require(cfg.gamma != 0.0, "invalid-params",
          "LSP form requires a nonzero gamma");
  const int order = static_cast<int>(mgc.size()) - 1;
  auto norm = gnorm(mgc, cfg.gamma);
  LspFrame frame;
  frame.gain = std::log(norm[0]);
  std::vector<double> a(order);
  for (int m = 1; m <= order; ++m) a[m - 1] = cfg.gamma * norm[m];

  constexpr int kGrid = 4096;
  constexpr double kTol = 1e-10;
  auto p_roots = scan_roots([&](double w) { return lsp_even(a, w); }, kGrid, kTol);
  auto q_roots = scan_roots([&](double w) { return lsp_odd(a, w); }, kGrid, kTol);
  require(static_cast<int>(p_roots.size()) == order / 2 &&
              static_cast<int>(q_roots.size()) == order / 2,
          "unstable-frame",
          "expected " + std::to_string(order / 2) + "+" +
              std::to_string(order / 2) + " LSP roots, found " +
              std::to_string(p_roots.size()) + "+" +
              std::to_string(q_roots.size()));

  frame.lsp.resize(order);
  for (int i = 0; i < order / 2; ++i) {
    frame.lsp[2 * i] = p_roots[i];
    frame.lsp[2 * i + 1] = q_roots[i];
  }
  for (int i = 1; i < order; ++i)
    require(frame.lsp[i] > frame.lsp[i - 1], "unstable-frame",
            "LSP roots do not interlace");
  return frame;
}

std::vector<double> lsp_to_mgc(const LspFrame& frame, const MgcConfig& cfg) {
  require(cfg.gamma != 0.0, "invalid-params",
          "LSP form requires a nonzero gamma");
  const int order = static_cast<int>(frame.lsp.size());
  require(order % 2 == 0, "invalid-params", "LSP order must be even");

  // P(z) = (1+z^-1) prod(1 - 2cos(w)z^-1 + z^-2) over even-indexed roots,
  // Q(z) = (1-z^-1) prod(...) over odd-indexed roots; A = (P+Q)/2.
  auto expand = [&](bool even_set, double first_coef) {
    std::vector<double> poly{1.0, first_coef};
    for (int i = (even_set ? 0 : 1); i < order; i += 2) {
      const double c = -2.0 * std::cos(frame.lsp[i]);
      std::vector<double> next(poly.size() + 2, 0.0);
      for (size_t j = 0; j < poly.size(); ++j) {
        next[j] += poly[j];
        next[j + 1] += c * poly[j];
        next[j + 2] += poly[j];
      }
      poly = next;
    }
    return poly;
  };
  auto p_poly = expand(true, 1.0);
  auto q_poly = expand(false, -1.0);

  std::vector<double> a(order);
  for (int m = 1; m <= order; ++m)
    a[m - 1] = 0.5 * (p_poly[m] + q_poly[m]);

  std::vector<double> norm(static_cast<size_t>(order) + 1);
  norm[0] = std::exp(frame.gain);
  for (int m = 1; m <= order; ++m) norm[m] = a[m - 1] / cfg.gamma;
  return ignorm(norm, cfg.gamma);
}

}  // namespace uti2speech
