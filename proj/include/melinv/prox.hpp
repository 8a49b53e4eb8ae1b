/* prox.hpp  Closed-form proximity operators used by the joint algorithms.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "melinv/mel.hpp"

namespace melinv {

/// Shared state for the mel-fit prox: weights and the Cholesky factorization
/// of (lambda E^T E + rho I), computed once per (filterbank, lambda, rho).
struct ProxContext {
  ProxContext(const MelFilterbank& fb, double lambda, double rho);

  const MelFilterbank& filterbank() const { return *fb_; }
  double lambda() const { return lambda_; }
  double rho() const { return rho_; }
  const Eigen::LLT<Eigen::MatrixXd>& solver() const { return solver_; }

private:
  const MelFilterbank* fb_;
  double lambda_;
  double rho_;
  Eigen::LLT<Eigen::MatrixXd> solver_;
};

/// prox of the magnitude least squares 0.5 || |.| - Y ||^2 / rho at Psi:
///   ((Y + rho |Psi|) / (1 + rho)) * Psi / |Psi|
/// Where Psi is zero the phase factor is taken as 1 (zero phase), giving
/// Y / (1 + rho) there.
Eigen::MatrixXcd prox_magnitude_fit(const Eigen::MatrixXcd& Psi,
                                    const MagnitudeGram& Y, double rho);

/// prox of (lambda/rho) * 0.5 ||E W - M||^2 at Phi:
///   (lambda E^T E + rho I)^{-1} (lambda E^T M + rho Phi)
/// computed through the context's cached factorization. The result may have
/// negative entries; nonnegativity is enforced in the Y update, not here.
MagnitudeGram prox_mel_fit(const ProxContext& ctx, const MagnitudeGram& Phi,
                           const MelGram& M);

/// Y update of the joint ADMM scheme: (|X| + rho Upsilon)_+ / (1 + rho),
/// where Upsilon = W - U may be negative.
MagnitudeGram update_Y_joint(const MagnitudeGram& Xmag,
                             const MagnitudeGram& Upsilon, double rho);

/// Entrywise max(., 0).
MagnitudeGram project_nonneg(const MagnitudeGram& Y);

} // namespace melinv
