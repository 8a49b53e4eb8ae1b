/* prox.cpp  Proximity operators for the joint estimation algorithms.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/prox.hpp"

#include <cmath>
#include <limits>

namespace melinv {

ProxContext::ProxContext(const MelFilterbank& fb, double lambda, double rho)
    : fb_(&fb), lambda_(lambda), rho_(rho) {
  if (!(rho > 0.0)) throw InvalidInput("prox: rho must be positive");
  if (lambda < 0.0) throw InvalidInput("prox: lambda must be nonnegative");
  Eigen::MatrixXd system = lambda * fb.EtE;
  system.diagonal().array() += rho;
  solver_.compute(system);
  if (solver_.info() != Eigen::Success)
    throw InvalidInput("prox: failed to factorize lambda E^T E + rho I");
}

Eigen::MatrixXcd prox_magnitude_fit(const Eigen::MatrixXcd& Psi,
                                    const MagnitudeGram& Y, double rho) {
  if (rho < 0.0) throw InvalidInput("prox_magnitude_fit: rho must be >= 0");
  if (Psi.rows() != Y.rows() || Psi.cols() != Y.cols())
    throw InvalidInput("prox_magnitude_fit: shape mismatch");

  // Division guard applies only to the phase quotient, never to the blend.
  constexpr double tiny = std::numeric_limits<double>::min();
  Eigen::MatrixXcd out(Psi.rows(), Psi.cols());
  for (Eigen::Index j = 0; j < Psi.cols(); ++j) {
    for (Eigen::Index i = 0; i < Psi.rows(); ++i) {
      const std::complex<double> psi = Psi(i, j);
      const double mag = std::abs(psi);
      const double blend = (Y(i, j) + rho * mag) / (1.0 + rho);
      out(i, j) = mag > tiny ? std::complex<double>(blend) * (psi / mag)
                             : std::complex<double>(blend); // zero-phase bin
    }
  }
  return out;
}

MagnitudeGram prox_mel_fit(const ProxContext& ctx, const MagnitudeGram& Phi,
                           const MelGram& M) {
  const MelFilterbank& fb = ctx.filterbank();
  if (Phi.rows() != fb.bins()) throw InvalidInput("prox_mel_fit: Phi rows != bins");
  if (M.rows() != fb.bands()) throw InvalidInput("prox_mel_fit: M rows != bands");
  if (M.cols() != Phi.cols()) throw InvalidInput("prox_mel_fit: frame mismatch");

  Eigen::MatrixXd rhs = ctx.lambda() * (fb.E.transpose() * M) + ctx.rho() * Phi;
  return ctx.solver().solve(rhs);
}

MagnitudeGram update_Y_joint(const MagnitudeGram& Xmag,
                             const MagnitudeGram& Upsilon, double rho) {
  if (Xmag.rows() != Upsilon.rows() || Xmag.cols() != Upsilon.cols())
    throw InvalidInput("update_Y_joint: shape mismatch");
  return (Xmag + rho * Upsilon).cwiseMax(0.0) / (1.0 + rho);
}

MagnitudeGram project_nonneg(const MagnitudeGram& Y) { return Y.cwiseMax(0.0); }

} // namespace melinv
