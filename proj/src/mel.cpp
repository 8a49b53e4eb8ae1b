/* mel.cpp  Mel filterbank construction and nonnegative magnitude recovery.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/mel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace melinv {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

void finalize_caches(MelFilterbank& fb) {
  fb.EtE.noalias() = fb.E.transpose() * fb.E;
  // ||E^T E||_2 = ||E E^T||_2; the B x B side is the small one.
  Eigen::MatrixXd gram = fb.E * fb.E.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  fb.ete_norm = eig.eigenvalues().maxCoeff();
}

} // namespace

MelFilterbank build_mel_filterbank(int bands, int bins, int sample_rate,
                                   double f_min, double f_max) {
  if (bands < 1) throw InvalidInput("mel: bands must be >= 1");
  if (bands > bins) throw InvalidInput("mel: bands must not exceed fft bins");
  if (sample_rate <= 0) throw InvalidInput("mel: sample_rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (f_min < 0.0 || f_min >= f_max) throw InvalidInput("mel: need 0 <= f_min < f_max");
  if (f_max > nyquist) throw InvalidInput("mel: f_max exceeds Nyquist");

  // bins = fft_size/2 + 1 one-sided bins; bin k sits at k * sr / fft_size.
  const int fft_size = 2 * (bins - 1);
  if (fft_size < 1) throw InvalidInput("mel: too few fft bins");

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> centers(static_cast<size_t>(bands) + 2);
  for (int i = 0; i < bands + 2; ++i)
    centers[static_cast<size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));

  MelFilterbank fb;
  fb.E = Eigen::MatrixXd::Zero(bands, bins);
  fb.sample_rate = sample_rate;
  fb.f_min = f_min;
  fb.f_max = f_max;

  for (int b = 0; b < bands; ++b) {
    const double lo = centers[static_cast<size_t>(b)];
    const double mid = centers[static_cast<size_t>(b) + 1];
    const double hi = centers[static_cast<size_t>(b) + 2];
    const double area_gain = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      const double rising = (f - lo) / (mid - lo);
      const double falling = (hi - f) / (hi - mid);
      const double tri = std::max(0.0, std::min(rising, falling));
      fb.E(b, k) = area_gain * tri;
    }
  }
  finalize_caches(fb);
  return fb;
}

MelFilterbank filterbank_from_matrix(Eigen::MatrixXd E, int sample_rate,
                                     double f_min, double f_max) {
  if (E.rows() < 1 || E.cols() < 1) throw InvalidInput("mel: empty filterbank matrix");
  if (E.rows() > E.cols()) throw InvalidInput("mel: bands must not exceed fft bins");
  if ((E.array() < 0.0).any()) throw InvalidInput("mel: filterbank must be nonnegative");
  if (!E.allFinite()) throw InvalidInput("mel: filterbank must be finite");
  MelFilterbank fb;
  fb.E = std::move(E);
  fb.sample_rate = sample_rate;
  fb.f_min = f_min;
  fb.f_max = f_max;
  finalize_caches(fb);
  return fb;
}

MelGram mel_compress(const MelFilterbank& fb, const MagnitudeGram& A) {
  if (A.rows() != fb.bins()) throw InvalidInput("mel_compress: row count != fft bins");
  if ((A.array() < 0.0).any()) throw InvalidInput("mel_compress: magnitude must be >= 0");
  return fb.E * A;
}

namespace {

// Lawson-Hanson active-set nonnegative least squares for one frame.
// Outer iterations grow the passive (positive) set; the inner loop backs
// off along the segment to the previous iterate when a candidate solve
// leaves the feasible set. Exact at termination up to the dual tolerance.
struct FrameNnls {
  Eigen::VectorXd y;
  std::vector<double> objectives; // after each outer iteration
  bool converged = false;
  int iterations = 0;
  double pg_norm = 0.0;
};

FrameNnls nnls_frame(const Eigen::MatrixXd& E, const Eigen::VectorXd& m,
                     int max_iters, double tol) {
  const Eigen::Index f = E.cols();
  FrameNnls res;
  res.y = Eigen::VectorXd::Zero(f);
  std::vector<bool> passive(static_cast<std::size_t>(f), false);
  std::vector<Eigen::Index> support;

  const auto objective = [&](const Eigen::VectorXd& y) {
    return 0.5 * (E * y - m).squaredNorm();
  };
  const auto solve_support = [&]() {
    Eigen::MatrixXd sub(E.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
      sub.col(static_cast<Eigen::Index>(i)) = E.col(support[i]);
    return Eigen::VectorXd(sub.colPivHouseholderQr().solve(m));
  };

  Eigen::VectorXd w = E.transpose() * (m - E * res.y);
  res.objectives.push_back(objective(res.y));

  // gradient is -w; zero coordinates count only when pushing inward
  const auto pg_norm_of = [&](const Eigen::VectorXd& w_cur) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < f; ++i) {
      const double c = res.y[i] > 0.0 ? w_cur[i] : std::max(w_cur[i], 0.0);
      acc += c * c;
    }
    return std::sqrt(acc);
  };

  while (res.iterations < max_iters) {
    if (pg_norm_of(w) <= tol) {
      res.converged = true;
      break;
    }
    // most violated dual coordinate among the active (zero) set
    Eigen::Index enter = -1;
    double w_max = 0.0;
    for (Eigen::Index i = 0; i < f; ++i)
      if (!passive[static_cast<std::size_t>(i)] && w[i] > w_max) {
        w_max = w[i];
        enter = i;
      }
    if (enter < 0) {
      // remaining violation lives in solver roundoff on the support
      res.converged = true;
      break;
    }
    ++res.iterations;
    passive[static_cast<std::size_t>(enter)] = true;
    support.push_back(enter);

    Eigen::VectorXd z = solve_support();
    int guard = 0;
    while ((z.array() <= 0.0).any() && guard++ < 3 * f) {
      double alpha = 1.0;
      for (std::size_t i = 0; i < support.size(); ++i)
        if (z[static_cast<Eigen::Index>(i)] <= 0.0) {
          const double yi = res.y[support[i]];
          alpha = std::min(alpha, yi / (yi - z[static_cast<Eigen::Index>(i)]));
        }
      for (std::size_t i = 0; i < support.size(); ++i) {
        const Eigen::Index idx = support[i];
        res.y[idx] += alpha * (z[static_cast<Eigen::Index>(i)] - res.y[idx]);
      }
      std::vector<Eigen::Index> kept;
      for (const Eigen::Index idx : support) {
        if (res.y[idx] > 0.0) {
          kept.push_back(idx);
        } else {
          res.y[idx] = 0.0;
          passive[static_cast<std::size_t>(idx)] = false;
        }
      }
      support = std::move(kept);
      if (support.empty()) break;
      z = solve_support();
    }
    for (std::size_t i = 0; i < support.size(); ++i)
      res.y[support[i]] = std::max(0.0, z[static_cast<Eigen::Index>(i)]);

    const double obj = objective(res.y);
    // rounding guard: a non-improving step means we are at the optimum
    if (obj > res.objectives.back() + 1e-12 * (1.0 + res.objectives.back())) {
      res.objectives.push_back(res.objectives.back());
      res.converged = true;
      break;
    }
    res.objectives.push_back(std::min(obj, res.objectives.back()));
    w = E.transpose() * (m - E * res.y);
  }

  res.pg_norm = pg_norm_of(w);
  return res;
}

} // namespace

MelInvertResult invert_mel_lsq(const MelGram& M, const MelFilterbank& fb,
                               const MelInvertOptions& opts) {
  if (M.rows() != fb.bands()) throw InvalidInput("invert_mel_lsq: row count != bands");
  if ((M.array() < 0.0).any()) throw InvalidInput("invert_mel_lsq: mel must be >= 0");

  MelInvertResult res;
  res.Y = MagnitudeGram::Zero(fb.bins(), M.cols());
  res.converged = true;

  std::vector<std::vector<double>> histories;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    FrameNnls frame = nnls_frame(fb.E, M.col(j), opts.max_iters, opts.tol);
    res.Y.col(j) = frame.y;
    res.converged = res.converged && frame.converged;
    res.iterations = std::max(res.iterations, frame.iterations);
    res.max_pg_norm = std::max(res.max_pg_norm, frame.pg_norm);
    histories.push_back(std::move(frame.objectives));
  }

  // combined objective after k outer iterations, frames clamped at their
  // own termination; non-increasing because each frame's history is
  std::size_t longest = 0;
  for (const auto& h : histories) longest = std::max(longest, h.size());
  res.objective_history.resize(longest, 0.0);
  for (const auto& h : histories)
    for (std::size_t k = 0; k < longest; ++k)
      res.objective_history[k] += h[std::min(k, h.size() - 1)];
  return res;
}

} // namespace melinv
