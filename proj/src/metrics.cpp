/* metrics.cpp  Spectral convergence measures.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace melinv {
namespace {

double ratio_db(double numerator, double denominator) {
  if (numerator == 0.0) return kMetricFloorDb;
  return std::max(kMetricFloorDb, 20.0 * std::log10(numerator / denominator));
}

} // namespace

double scm(const Signal& xhat, const MelGram& M, const MelFilterbank& fb,
           const StftConfig& cfg) {
  const double m_norm = M.norm();
  if (!(m_norm > 0.0)) throw InvalidInput("scm: ||M|| must be positive");
  if (M.rows() != fb.bands()) throw InvalidInput("scm: mel rows != filterbank bands");

  const Spectrogram spec = stft(xhat, cfg);
  if (spec.frames() != M.cols())
    throw InvalidInput("scm: reconstruction frame count does not match mel frames");
  const MagnitudeGram mag = spec.data.cwiseAbs();
  return ratio_db((fb.E * mag - M).norm(), m_norm);
}

double sc(const Signal& xhat, const MagnitudeGram& A, const StftConfig& cfg) {
  const double a_norm = A.norm();
  if (!(a_norm > 0.0)) throw InvalidInput("sc: ||A|| must be positive");

  const Spectrogram spec = stft(xhat, cfg);
  if (spec.frames() != A.cols() || spec.bins() != A.rows())
    throw InvalidInput("sc: reconstruction shape does not match reference");
  const MagnitudeGram mag = spec.data.cwiseAbs();
  return ratio_db((mag - A).norm(), a_norm);
}

double joint_objective(const Eigen::MatrixXcd& X, const MagnitudeGram& Y,
                       const MelGram& M, const MelFilterbank& fb, double lambda) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw InvalidInput("joint_objective: X/Y shape mismatch");
  if (Y.rows() != fb.bins() || M.rows() != fb.bands() || M.cols() != Y.cols())
    throw InvalidInput("joint_objective: mel shape mismatch");
  const double fit = 0.5 * (X.cwiseAbs() - Y).squaredNorm();
  const double mel_fit = 0.5 * (fb.E * Y - M).squaredNorm();
  return fit + lambda * mel_fit;
}

} // namespace melinv
