/* mel.hpp  Mel filterbank and full-band magnitude recovery.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <Eigen/Core>
#include <vector>

#include "melinv/errors.hpp"

namespace melinv {

/// Nonnegative real F x T matrix of STFT magnitudes (or of intermediates of
/// the joint algorithms, which may carry negative entries).
using MagnitudeGram = Eigen::MatrixXd;

/// Nonnegative real B x T mel-spectrogram.
using MelGram = Eigen::MatrixXd;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank E (B x F) on the scale
/// m(f) = 2595 log10(1 + f/700), with area normalization 2/(c_{b+1}-c_{b-1}).
/// EtE and its spectral norm are cached for the joint algorithms.
struct MelFilterbank {
  Eigen::MatrixXd E;
  int sample_rate = 16000;
  double f_min = 0.0;
  double f_max = 8000.0;

  Eigen::MatrixXd EtE;   // F x F, E^T E
  double ete_norm = 0.0; // largest eigenvalue of E^T E

  Eigen::Index bands() const { return E.rows(); }
  Eigen::Index bins() const { return E.cols(); }
};

/// Builds the filterbank described above. f_max above Nyquist, f_min >= f_max
/// or bands > bins are rejected.
MelFilterbank build_mel_filterbank(int bands, int bins, int sample_rate,
                                   double f_min, double f_max);

/// Wraps an externally supplied matrix (e.g. loaded from file) so it can be
/// used everywhere a built filterbank can.
MelFilterbank filterbank_from_matrix(Eigen::MatrixXd E, int sample_rate,
                                     double f_min, double f_max);

/// M = E A. A must be nonnegative with E.cols() rows.
MelGram mel_compress(const MelFilterbank& fb, const MagnitudeGram& A);

struct MelInvertOptions {
  int max_iters = 1000;    // per-frame iteration cap
  double tol = 1e-8;       // projected-gradient norm threshold, per frame
};

struct MelInvertResult {
  MagnitudeGram Y;                       // F x T, entrywise >= 0
  bool converged = false;                // all frames reached tol
  int iterations = 0;
  double max_pg_norm = 0.0;              // worst frame at exit
  std::vector<double> objective_history; // 0.5 ||E Y - M||_F^2 per iteration
};

/// Approximately minimizes 0.5 ||E Y - M||_F^2 over Y >= 0 with accelerated
/// projected gradient (fixed step 1/||E^T E||_2, monotone restart). Frames
/// are independent; the iteration stops when every frame's projected
/// gradient norm is at or below tol, or at the iteration cap.
MelInvertResult invert_mel_lsq(const MelGram& M, const MelFilterbank& fb,
                               const MelInvertOptions& opts = {});

} // namespace melinv
