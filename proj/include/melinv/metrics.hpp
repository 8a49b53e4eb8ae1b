/* metrics.hpp  Spectral convergence measures and the joint objective.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include "melinv/mel.hpp"
#include "melinv/stft.hpp"

namespace melinv {

/// dB floor used instead of -inf when a numerator vanishes.
inline constexpr double kMetricFloorDb = -300.0;

/// Spectral convergence on the mel-spectrogram:
///   20 log10( ||E |STFT(xhat)| - M|| / ||M|| ), clamped below at -300 dB.
/// xhat must produce exactly M.cols() frames; ||M|| must be positive.
double scm(const Signal& xhat, const MelGram& M, const MelFilterbank& fb,
           const StftConfig& cfg);

/// Full-band spectral convergence:
///   20 log10( || |STFT(xhat)| - A || / ||A|| ), clamped below at -300 dB.
double sc(const Signal& xhat, const MagnitudeGram& A, const StftConfig& cfg);

/// Joint objective 0.5 || |X| - Y ||_F^2 + lambda * 0.5 ||E Y - M||_F^2.
double joint_objective(const Eigen::MatrixXcd& X, const MagnitudeGram& Y,
                       const MelGram& M, const MelFilterbank& fb,
                       double lambda);

} // namespace melinv
