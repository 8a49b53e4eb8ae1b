/* algorithms.hpp  Phase reconstruction and mel-spectrogram inversion loops.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "melinv/mel.hpp"
#include "melinv/stft.hpp"

namespace melinv {

enum class PhaseInit { ZeroPhase, RandomPhase };

struct AlgoConfig {
  int iters = 500;
  double rho = 0.1;       // ADMM penalty
  double lambda = 5000.0; // mel-fidelity weight (10 is the usual iPALM choice)
  double alpha = 0.99;    // iPALM inertia
  double mu = 1.0;        // PG-GLA step size; 1 gives classic GLA
  std::uint64_t seed = 0; // phase initialization seed
  int trace_every = 10;
};

/// One recorded trace row. scm_db/sc_db/objective are NaN when the
/// corresponding target was not supplied.
struct TracePoint {
  int iteration = 0;
  double scm_db = 0.0;
  double sc_db = 0.0;
  bool has_sc = false;
  double objective = 0.0;
  double elapsed_ms = 0.0;
};

struct RunTrace {
  std::vector<TracePoint> points;
};

/// What the per-iteration tracer measures against. All pointers are
/// borrowed and may be null; mel+fb enable SCM and the joint objective,
/// reference_mag enables SC.
struct TraceTargets {
  const MelGram* mel = nullptr;
  const MelFilterbank* fb = nullptr;
  const MagnitudeGram* reference_mag = nullptr;
};

/// Full iterate of the joint algorithms. Z_old is only advanced by the
/// inertial scheme; V and U are the scaled duals.
struct JointState {
  Spectrogram X;
  Spectrogram Z;
  Spectrogram Z_old;
  Spectrogram V;
  MagnitudeGram Y;
  MagnitudeGram W;
  MagnitudeGram U;
  int iteration = 0;
};

struct AlgoResult {
  Spectrogram Z; // final consistent estimate
  RunTrace trace;
  JointState state;                      // final full state
  double final_primal_residual_z = 0.0;  // ||Z - X||_F, ADMM variants
  double final_primal_residual_y = 0.0;  // ||Y - W||_F, joint ADMM
};

/// P_C(magnitude (.) e^{i theta}) with theta = 0 or i.i.d. uniform in
/// (-pi, pi] drawn from the seed. The standard consistent starting point.
Spectrogram seed_phase(const MagnitudeGram& magnitude, const StftConfig& stft_cfg,
                       int sample_rate, Eigen::Index signal_length,
                       std::uint64_t seed, PhaseInit mode);

/// Initial joint state from a mel-spectrogram: Y0 = (E^T M)_+ rescaled so
/// ||E Y0|| = ||M|| (skipped when E Y0 = 0), Z0 = P_C(Y0 e^{i theta}) with
/// zero or seeded uniform phase, zero duals, W0 = Y0.
JointState init_state(const MelGram& M, const MelFilterbank& fb,
                      const StftConfig& stft_cfg, int sample_rate,
                      const AlgoConfig& cfg, PhaseInit mode);

/// Projected gradient descent on 0.5 || |X| - A ||^2 over the image of
/// STFT; mu = 1 reproduces the classic magnitude-replacement iteration.
/// The gradient is taken as zero at zero-magnitude bins.
AlgoResult pg_gla(const MagnitudeGram& A, const Spectrogram& X0,
                  const AlgoConfig& cfg, const TraceTargets& targets = {});

/// ADMM variant of the above with a fixed target magnitude:
///   X <- prox_magnitude_fit(Z + V, A, rho); Z <- P_C(X - V); V <- V + Z - X.
AlgoResult admm_gla(const MagnitudeGram& A, const Spectrogram& Z0,
                    const AlgoConfig& cfg, const TraceTargets& targets = {});

/// Inertial proximal alternating linearized minimization for the joint
/// magnitude/phase estimation from a mel-spectrogram.
AlgoResult ipalm_joint(const MelGram& M, const MelFilterbank& fb,
                       JointState init, const AlgoConfig& cfg,
                       const TraceTargets& targets = {});

/// ADMM splitting for the same joint problem; the W update reuses the
/// cached factorization of (lambda E^T E + rho I).
AlgoResult admm_joint(const MelGram& M, const MelFilterbank& fb,
                      JointState init, const AlgoConfig& cfg,
                      const TraceTargets& targets = {});

} // namespace melinv
