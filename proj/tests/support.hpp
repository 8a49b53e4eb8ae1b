/* support.hpp  Test-only oracles, generators, and helpers.
 *
 * Everything in here is deliberately independent of the library's
 * implementation paths: naive DFTs instead of FFTs, triple-loop matrix
 * products, exhaustive searches instead of closed forms.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "melinv/algorithms.hpp"
#include "melinv/mel.hpp"
#include "melinv/stft.hpp"

namespace testsupport {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// deterministic random data

inline double unif(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline melinv::Signal random_signal(std::uint64_t seed, std::size_t n,
                                    int sample_rate = 16000) {
  std::mt19937_64 rng(seed);
  melinv::Signal s;
  s.sample_rate = sample_rate;
  s.samples.resize(n);
  for (auto& v : s.samples) v = unif(rng, -1.0, 1.0);
  return s;
}

inline Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index rows,
                                     Eigen::Index cols, double lo = -1.0,
                                     double hi = 1.0) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = unif(rng, lo, hi);
  return m;
}

inline Eigen::MatrixXcd random_complex_matrix(std::uint64_t seed, Eigen::Index rows,
                                              Eigen::Index cols) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = std::complex<double>(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
  return m;
}

inline melinv::Spectrogram random_spectrogram(std::uint64_t seed,
                                              const melinv::StftConfig& cfg,
                                              Eigen::Index frames,
                                              int sample_rate = 16000) {
  melinv::Spectrogram s;
  s.data = random_complex_matrix(seed, cfg.num_bins(), frames);
  s.config = cfg;
  s.sample_rate = sample_rate;
  s.signal_length = melinv::default_signal_length(frames, cfg);
  return s;
}

// ---------------------------------------------------------------------------
// naive STFT oracle (direct DFT by definition, shared padding convention)

inline Eigen::MatrixXcd naive_stft(const melinv::Signal& sig,
                                   const melinv::StftConfig& cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(sig.samples.size());
  const Eigen::Index pad_left = cfg.window_length - cfg.hop_length;
  const Eigen::Index frames = melinv::frame_count(n, cfg);
  const Eigen::Index total = (frames - 1) * cfg.hop_length + cfg.window_length;
  std::vector<double> padded(static_cast<std::size_t>(total), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    padded[static_cast<std::size_t>(pad_left + i)] = sig.samples[static_cast<std::size_t>(i)];

  const std::vector<double> w = melinv::hann_window(cfg.window_length);
  const int bins = cfg.num_bins();
  Eigen::MatrixXcd out(bins, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (int m = 0; m < cfg.window_length; ++m) {
        const double x = padded[static_cast<std::size_t>(t * cfg.hop_length + m)] *
                         w[static_cast<std::size_t>(m)];
        const double ang = -2.0 * kPi * k * m / cfg.fft_size;
        acc += x * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      out(k, t) = acc;
    }
  }
  return out;
}

// naive inverse DFT of a one-sided frame (Hermitian extension by definition)
inline std::vector<double> naive_frame_idft(const Eigen::VectorXcd& half, int fft_size) {
  std::vector<double> out(static_cast<std::size_t>(fft_size), 0.0);
  const int bins = static_cast<int>(half.size());
  for (int m = 0; m < fft_size; ++m) {
    double acc = 0.0;
    for (int k = 0; k < fft_size; ++k) {
      std::complex<double> z;
      if (k < bins) {
        z = half[k];
        if (k == 0 || (fft_size % 2 == 0 && k == bins - 1))
          z = std::complex<double>(z.real(), 0.0);
      } else {
        z = std::conj(half[fft_size - k]);
      }
      const double ang = 2.0 * kPi * k * m / fft_size;
      acc += (z * std::complex<double>(std::cos(ang), std::sin(ang))).real();
    }
    out[static_cast<std::size_t>(m)] = acc / fft_size;
  }
  return out;
}

// canonical dual overlap-add by definition, full padded buffer
inline std::vector<double> naive_istft_buffer(const Eigen::MatrixXcd& data,
                                              const melinv::StftConfig& cfg) {
  const Eigen::Index frames = data.cols();
  const Eigen::Index total = (frames - 1) * cfg.hop_length + cfg.window_length;
  const std::vector<double> w = melinv::hann_window(cfg.window_length);
  std::vector<double> num(static_cast<std::size_t>(total), 0.0);
  std::vector<double> den(static_cast<std::size_t>(total), 0.0);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::vector<double> frame = naive_frame_idft(data.col(t), cfg.fft_size);
    for (int i = 0; i < cfg.window_length; ++i) {
      num[static_cast<std::size_t>(t * cfg.hop_length + i)] +=
          w[static_cast<std::size_t>(i)] * frame[static_cast<std::size_t>(i)];
      den[static_cast<std::size_t>(t * cfg.hop_length + i)] +=
          w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    }
  }
  for (std::size_t p = 0; p < num.size(); ++p)
    num[p] = den[p] > 0.0 ? num[p] / den[p] : 0.0;
  return num;
}

// ---------------------------------------------------------------------------
// small linear algebra oracles

inline Eigen::MatrixXd naive_matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

// hand-rolled Gaussian elimination with partial pivoting
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (pivot != col) {
      a.row(col).swap(a.row(pivot));
      std::swap(b[col], b[pivot]);
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
      b[r] -= f * b[col];
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (Eigen::Index c = r + 1; c < n; ++c) acc -= a(r, c) * x[c];
    x[r] = acc / a(r, r);
  }
  return x;
}

// exhaustive nonnegative least squares: enumerate every support pattern,
// solve the unconstrained restriction, keep the best feasible objective
inline double nnls_enumerate_objective(const Eigen::MatrixXd& E,
                                       const Eigen::VectorXd& m) {
  const int f = static_cast<int>(E.cols());
  double best = 0.5 * m.squaredNorm(); // empty support: y = 0
  for (unsigned mask = 1; mask < (1u << f); ++mask) {
    std::vector<int> cols;
    for (int c = 0; c < f; ++c)
      if (mask & (1u << c)) cols.push_back(c);
    Eigen::MatrixXd sub(E.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = E.col(cols[i]);
    Eigen::VectorXd y = sub.completeOrthogonalDecomposition().solve(m);
    if ((y.array() < -1e-12).any()) continue;
    const double obj = 0.5 * (sub * y - m).squaredNorm();
    if (obj < best) best = obj;
  }
  return best;
}

// ---------------------------------------------------------------------------
// brute-force scalar prox of the magnitude least squares
//   argmin_x 0.5 (|x| - y)^2 / rho + 0.5 |x - psi|^2
// coarse complex grid followed by zoom refinement

inline std::complex<double> brute_force_prox_mag(std::complex<double> psi, double y,
                                                 double rho) {
  const auto cost = [&](std::complex<double> x) {
    const double d = std::abs(x) - y;
    return 0.5 * d * d / rho + 0.5 * std::norm(x - psi);
  };
  double radius = std::max(std::abs(psi), y) + 1.0;
  std::complex<double> center = 0.0, best = 0.0;
  double best_cost = cost(best);
  for (int round = 0; round < 14; ++round) {
    const int grid = round == 0 ? 81 : 21;
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        const std::complex<double> x(
            center.real() + radius * (2.0 * a / (grid - 1) - 1.0),
            center.imag() + radius * (2.0 * b / (grid - 1) - 1.0));
        const double c = cost(x);
        if (c < best_cost) {
          best_cost = c;
          best = x;
        }
      }
    }
    center = best;
    radius *= round == 0 ? 0.05 : 0.2;
  }
  return best;
}

// ---------------------------------------------------------------------------
// independent mel filterbank construction (same declared formulas, separate code)

inline Eigen::MatrixXd mel_filterbank_oracle(int bands, int bins, int sample_rate,
                                             double f_min, double f_max) {
  const auto to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const auto to_hz = [](double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  };
  std::vector<double> edges(static_cast<std::size_t>(bands) + 2);
  const double lo = to_mel(f_min), hi = to_mel(f_max);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = to_hz(lo + (hi - lo) * static_cast<double>(i) / (bands + 1));

  const int fft_size = 2 * (bins - 1);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(bands, bins);
  for (int k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate / fft_size;
    for (int b = 0; b < bands; ++b) {
      const double left = edges[static_cast<std::size_t>(b)];
      const double mid = edges[static_cast<std::size_t>(b) + 1];
      const double right = edges[static_cast<std::size_t>(b) + 2];
      double v = 0.0;
      if (f > left && f < right) {
        if (f <= mid) v = (f - left) / (mid - left);
        else v = (right - f) / (right - mid);
      } else if (f == mid) {
        v = 1.0;
      }
      E(b, k) = v * 2.0 / (right - left);
    }
  }
  return E;
}

// ---------------------------------------------------------------------------
// speech-like synthetic clips: gliding harmonic source shaped by a few
// formant bumps, plus bandpassed noise and a syllabic amplitude envelope

inline melinv::Signal synth_speech_like(std::uint64_t seed, int sample_rate = 16000,
                                        double duration_s = 1.0) {
  std::mt19937_64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(duration_s * sample_rate);
  const double nyquist = 0.48 * sample_rate;

  struct Biquad {
    double b0, b2, a1, a2;
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    double step(double x) {
      const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = x;
      y2 = y1;
      y1 = y;
      return y;
    }
  };
  const auto make_bandpass = [&](double freq, double q) {
    const double w0 = 2.0 * kPi * freq / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    return Biquad{alpha / a0, -alpha / a0, -2.0 * std::cos(w0) / a0,
                  (1.0 - alpha) / a0};
  };

  melinv::Signal s;
  s.sample_rate = sample_rate;
  s.samples.resize(n, 0.0);

  // syllable-like segments: voiced vowels, fricative bursts, stop gaps,
  // each with sharp attacks so the time structure actually matters
  std::size_t pos = 0;
  double f0 = unif(rng, 85.0, 140.0);
  std::vector<double> phase(64, 0.0);
  double peak = 0.0;
  while (pos < n) {
    const double r = unif(rng, 0.0, 1.0);
    const std::size_t seg_len = static_cast<std::size_t>(
        unif(rng, 0.06, 0.18) * sample_rate);
    const std::size_t end = std::min(n, pos + seg_len);

    if (r < 0.18 && pos > 0) { // silence gap (stop closure), never leading
      pos = end;
      continue;
    }

    const std::size_t attack = static_cast<std::size_t>(0.005 * sample_rate);
    const std::size_t release = static_cast<std::size_t>(0.02 * sample_rate);
    const auto envelope = [&](std::size_t i) {
      const std::size_t k = i - pos;
      const std::size_t len = end - pos;
      double e = 1.0;
      if (k < attack) e = static_cast<double>(k) / attack;
      if (len - 1 - k < release)
        e = std::min(e, static_cast<double>(len - 1 - k) / release);
      return e;
    };

    if (r < 0.48) { // unvoiced fricative burst
      Biquad band = make_bandpass(unif(rng, 2500.0, 6000.0), unif(rng, 0.8, 2.0));
      const double gain = unif(rng, 0.25, 0.7);
      for (std::size_t i = pos; i < end; ++i)
        s.samples[i] = gain * band.step(unif(rng, -1.0, 1.0)) * envelope(i);
      if (unif(rng, 0.0, 1.0) < 0.5) { // burst onset click
        for (std::size_t i = pos; i < std::min(end, pos + static_cast<std::size_t>(
                                                          0.003 * sample_rate));
             ++i)
          s.samples[i] += 0.8 * unif(rng, -1.0, 1.0);
      }
    } else { // voiced vowel-like segment
      const double f0_target = unif(rng, 85.0, 200.0);
      const double glide = std::pow(f0_target / f0, 1.0 / static_cast<double>(end - pos));
      const double formants[3] = {unif(rng, 450.0, 900.0), unif(rng, 1200.0, 1900.0),
                                  unif(rng, 2300.0, 3200.0)};
      const double widths[3] = {unif(rng, 80.0, 140.0), unif(rng, 120.0, 200.0),
                                unif(rng, 180.0, 280.0)};
      const auto formant_gain = [&](double f) {
        double g = 0.05;
        for (int j = 0; j < 3; ++j) {
          const double d = (f - formants[j]) / widths[j];
          g += std::exp(-0.5 * d * d);
        }
        return g;
      };
      Biquad breath = make_bandpass(unif(rng, 3000.0, 5000.0), 0.8);
      const double breath_gain = unif(rng, 0.05, 0.15);
      for (std::size_t i = pos; i < end; ++i) {
        f0 *= glide;
        double v = 0.0;
        for (int h = 1; h <= 60; ++h) {
          const double fh = h * f0;
          if (fh > nyquist) break;
          auto& ph = phase[static_cast<std::size_t>(h - 1)];
          ph += 2.0 * kPi * fh / sample_rate;
          v += formant_gain(fh) / std::sqrt(static_cast<double>(h)) * std::sin(ph);
        }
        v += breath_gain * breath.step(unif(rng, -1.0, 1.0));
        s.samples[i] = 0.35 * v * envelope(i);
      }
    }
    pos = end;
    for (std::size_t i = (pos > seg_len ? pos - seg_len : 0); i < pos; ++i)
      peak = std::max(peak, std::abs(s.samples[i]));
  }
  if (peak > 0.0)
    for (auto& v : s.samples) v *= 0.45 / peak;
  return s;
}

// textbook Griffin-Lim: magnitude replacement followed by the projection,
// coded on its own so algorithm equivalences can be checked bit-for-bit
inline melinv::Spectrogram textbook_gla(const melinv::MagnitudeGram& A,
                                        melinv::Spectrogram X, int iters) {
  for (int k = 0; k < iters; ++k) {
    Eigen::MatrixXcd replaced(X.data.rows(), X.data.cols());
    for (Eigen::Index j = 0; j < X.data.cols(); ++j) {
      for (Eigen::Index i = 0; i < X.data.rows(); ++i) {
        const std::complex<double> x = X.data(i, j);
        const double mag = std::abs(x);
        replaced(i, j) = mag > 0.0 ? std::complex<double>(A(i, j)) * (x / mag)
                                   : std::complex<double>(0.0);
      }
    }
    X.data = std::move(replaced);
    X = melinv::project_consistency(X);
  }
  return X;
}

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace testsupport
