/* algorithms.cpp  PG-GLA, ADMM-GLA, and the joint magnitude/phase estimators.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "melinv/metrics.hpp"
#include "melinv/prox.hpp"

namespace melinv {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate_common(const AlgoConfig& cfg) {
  if (cfg.iters < 0) throw InvalidInput("algo: iters must be >= 0");
  if (cfg.trace_every < 1) throw InvalidInput("algo: trace_every must be >= 1");
}

Spectrogram like(const Spectrogram& proto, Eigen::MatrixXcd data) {
  Spectrogram s;
  s.data = std::move(data);
  s.config = proto.config;
  s.sample_rate = proto.sample_rate;
  s.signal_length = proto.signal_length;
  return s;
}

// Per-iteration measurements. SCM and the joint objective need mel targets,
// SC needs the reference magnitude; anything unavailable becomes NaN.
class Tracer {
public:
  Tracer(const AlgoConfig& cfg, const MelGram* mel, const MelFilterbank* fb,
         const MagnitudeGram* reference, const MagnitudeGram* gla_target)
      : every_(cfg.trace_every), lambda_(cfg.lambda), mel_(mel), fb_(fb),
        reference_(reference), gla_target_(gla_target),
        start_(std::chrono::steady_clock::now()) {}

  bool due(int k, int total) const {
    return k == 0 || k == total || k % every_ == 0;
  }

  void record(int k, const Eigen::MatrixXcd& Z, const MagnitudeGram* Y) {
    TracePoint p;
    p.iteration = k;
    const MagnitudeGram mag = Z.cwiseAbs();

    p.scm_db = kNan;
    if (mel_ && fb_) {
      const double den = mel_->norm();
      if (den > 0.0) p.scm_db = ratio_db((fb_->E * mag - *mel_).norm(), den);
    }
    p.has_sc = reference_ != nullptr;
    p.sc_db = kNan;
    if (reference_) {
      const double den = reference_->norm();
      if (den > 0.0) p.sc_db = ratio_db((mag - *reference_).norm(), den);
    }
    if (Y && mel_ && fb_) {
      p.objective = 0.5 * (mag - *Y).squaredNorm() +
                    lambda_ * 0.5 * (fb_->E * *Y - *mel_).squaredNorm();
    } else if (gla_target_) {
      p.objective = 0.5 * (mag - *gla_target_).squaredNorm();
    } else {
      p.objective = kNan;
    }
    p.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start_)
                       .count();
    trace_.points.push_back(p);
  }

  RunTrace take() { return std::move(trace_); }

private:
  static double ratio_db(double num, double den) {
    if (num == 0.0) return kMetricFloorDb;
    return std::max(kMetricFloorDb, 20.0 * std::log10(num / den));
  }

  int every_;
  double lambda_;
  const MelGram* mel_;
  const MelFilterbank* fb_;
  const MagnitudeGram* reference_;
  const MagnitudeGram* gla_target_;
  std::chrono::steady_clock::time_point start_;
  RunTrace trace_;
};

// A (.) X / |X| with the gradient convention: zero-magnitude bins stay zero.
Eigen::MatrixXcd magnitude_replace(const MagnitudeGram& A,
                                   const Eigen::MatrixXcd& X) {
  Eigen::MatrixXcd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const std::complex<double> x = X(i, j);
      const double mag = std::abs(x);
      out(i, j) = mag > 0.0 ? std::complex<double>(A(i, j)) * (x / mag)
                            : std::complex<double>(0.0);
    }
  }
  return out;
}

void check_target(const MagnitudeGram& A, const Spectrogram& X0) {
  X0.config.validate();
  if (A.rows() != X0.bins() || A.cols() != X0.frames())
    throw InvalidInput("algo: target magnitude shape does not match init");
  if ((A.array() < 0.0).any())
    throw InvalidInput("algo: target magnitude must be nonnegative");
}

void check_joint(const MelGram& M, const MelFilterbank& fb, const JointState& s) {
  if (M.rows() != fb.bands()) throw InvalidInput("algo: mel rows != bands");
  if ((M.array() < 0.0).any()) throw InvalidInput("algo: mel must be nonnegative");
  if (s.Z.bins() != fb.bins() || s.Z.frames() != M.cols())
    throw InvalidInput("algo: state shape does not match mel/filterbank");
  if (s.Y.rows() != fb.bins() || s.Y.cols() != M.cols())
    throw InvalidInput("algo: Y shape mismatch");
}

} // namespace

Spectrogram seed_phase(const MagnitudeGram& magnitude, const StftConfig& stft_cfg,
                       int sample_rate, Eigen::Index signal_length,
                       std::uint64_t seed, PhaseInit mode) {
  stft_cfg.validate();
  if (magnitude.rows() != stft_cfg.num_bins())
    throw InvalidInput("seed_phase: magnitude rows != stft bins");

  Eigen::MatrixXcd data(magnitude.rows(), magnitude.cols());
  if (mode == PhaseInit::ZeroPhase) {
    data = magnitude.cast<std::complex<double>>();
  } else {
    std::mt19937_64 rng(seed);
    for (Eigen::Index j = 0; j < magnitude.cols(); ++j) {
      for (Eigen::Index i = 0; i < magnitude.rows(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
        const double theta = std::numbers::pi - 2.0 * std::numbers::pi * u;
        data(i, j) = std::polar(magnitude(i, j), theta);
      }
    }
  }

  Spectrogram raw;
  raw.data = std::move(data);
  raw.config = stft_cfg;
  raw.sample_rate = sample_rate;
  raw.signal_length = signal_length;
  return project_consistency(raw);
}

JointState init_state(const MelGram& M, const MelFilterbank& fb,
                      const StftConfig& stft_cfg, int sample_rate,
                      const AlgoConfig& cfg, PhaseInit mode) {
  stft_cfg.validate();
  if (M.rows() != fb.bands()) throw InvalidInput("init_state: mel rows != bands");
  if (fb.bins() != stft_cfg.num_bins())
    throw InvalidInput("init_state: filterbank bins != stft bins");
  if ((M.array() < 0.0).any()) throw InvalidInput("init_state: mel must be >= 0");
  const Eigen::Index frames = M.cols();
  if (frames < 1) throw InvalidInput("init_state: mel has no frames");
  const Eigen::Index length = default_signal_length(frames, stft_cfg);

  MagnitudeGram Y0 = (fb.E.transpose() * M).cwiseMax(0.0);
  const double projected_norm = (fb.E * Y0).norm();
  if (projected_norm > 0.0) Y0 *= M.norm() / projected_norm;

  JointState s;
  s.Z = seed_phase(Y0, stft_cfg, sample_rate, length, cfg.seed, mode);
  s.X = s.Z;
  s.Z_old = s.Z;
  s.V = like(s.Z, Eigen::MatrixXcd::Zero(Y0.rows(), Y0.cols()));
  s.Y = Y0;
  s.W = Y0;
  s.U = MagnitudeGram::Zero(Y0.rows(), Y0.cols());
  s.iteration = 0;
  return s;
}

AlgoResult pg_gla(const MagnitudeGram& A, const Spectrogram& X0,
                  const AlgoConfig& cfg, const TraceTargets& targets) {
  validate_common(cfg);
  check_target(A, X0);
  if (!(cfg.mu > 0.0)) throw InvalidInput("pg_gla: mu must be positive");

  Tracer tracer(cfg, targets.mel, targets.fb, targets.reference_mag, &A);
  Spectrogram X = X0;
  tracer.record(0, X.data, nullptr);
  const bool classic = cfg.mu == 1.0;

  for (int k = 1; k <= cfg.iters; ++k) {
    if (classic) {
      X = project_consistency(like(X, magnitude_replace(A, X.data)));
    } else {
      Eigen::MatrixXcd stepped = X.data - cfg.mu * (X.data - magnitude_replace(A, X.data));
      X = project_consistency(like(X, std::move(stepped)));
    }
    if (tracer.due(k, cfg.iters)) tracer.record(k, X.data, nullptr);
  }

  AlgoResult res;
  res.state.X = X;
  res.state.iteration = cfg.iters;
  res.Z = std::move(X);
  res.trace = tracer.take();
  return res;
}

AlgoResult admm_gla(const MagnitudeGram& A, const Spectrogram& Z0,
                    const AlgoConfig& cfg, const TraceTargets& targets) {
  validate_common(cfg);
  check_target(A, Z0);
  if (!(cfg.rho > 0.0)) throw InvalidInput("admm_gla: rho must be positive");

  Tracer tracer(cfg, targets.mel, targets.fb, targets.reference_mag, &A);
  Spectrogram Z = Z0;
  Spectrogram X = Z0;
  Spectrogram V = like(Z0, Eigen::MatrixXcd::Zero(Z0.bins(), Z0.frames()));
  tracer.record(0, Z.data, nullptr);

  for (int k = 1; k <= cfg.iters; ++k) {
    X.data = prox_magnitude_fit(Z.data + V.data, A, cfg.rho);
    Z = project_consistency(like(Z, X.data - V.data));
    V.data += Z.data - X.data;
    if (tracer.due(k, cfg.iters)) tracer.record(k, Z.data, nullptr);
  }

  AlgoResult res;
  res.final_primal_residual_z = (Z.data - X.data).norm();
  res.state.X = std::move(X);
  res.state.V = std::move(V);
  res.state.Z = Z;
  res.state.iteration = cfg.iters;
  res.Z = std::move(Z);
  res.trace = tracer.take();
  return res;
}

AlgoResult ipalm_joint(const MelGram& M, const MelFilterbank& fb,
                       JointState init, const AlgoConfig& cfg,
                       const TraceTargets& targets) {
  validate_common(cfg);
  check_joint(M, fb, init);
  if (cfg.alpha < 0.0) throw InvalidInput("ipalm_joint: alpha must be >= 0");
  if (cfg.lambda < 0.0) throw InvalidInput("ipalm_joint: lambda must be >= 0");

  Tracer tracer(cfg, &M, &fb, targets.reference_mag, nullptr);
  JointState s = std::move(init);
  const Eigen::MatrixXd EtM = fb.E.transpose() * M;
  tracer.record(0, s.Z.data, &s.Y);

  for (int k = 1; k <= cfg.iters; ++k) {
    const Eigen::MatrixXcd inertial =
        s.Z.data + cfg.alpha * (s.Z.data - s.Z_old.data);
    // X <- Y (.) Z~ / |Z~|, zero-phase at vanishing bins.
    s.X.data = prox_magnitude_fit(inertial, s.Y, 0.0);
    s.W = s.Y - fb.EtE * s.Y + EtM;
    Spectrogram Z_new = project_consistency(like(s.Z, s.X.data));
    s.Z_old = std::move(s.Z);
    s.Z = std::move(Z_new);
    s.Y = (s.Z.data.cwiseAbs() + cfg.lambda * s.W).cwiseMax(0.0) /
          (1.0 + cfg.lambda);
    if (tracer.due(k, cfg.iters)) tracer.record(k, s.Z.data, &s.Y);
  }

  AlgoResult res;
  res.Z = s.Z;
  s.iteration = cfg.iters;
  res.state = std::move(s);
  res.trace = tracer.take();
  return res;
}

AlgoResult admm_joint(const MelGram& M, const MelFilterbank& fb,
                      JointState init, const AlgoConfig& cfg,
                      const TraceTargets& targets) {
  validate_common(cfg);
  check_joint(M, fb, init);
  const ProxContext ctx(fb, cfg.lambda, cfg.rho);

  Tracer tracer(cfg, &M, &fb, targets.reference_mag, nullptr);
  JointState s = std::move(init);
  tracer.record(0, s.Z.data, &s.Y);

  for (int k = 1; k <= cfg.iters; ++k) {
    s.X.data = prox_magnitude_fit(s.Z.data + s.V.data, s.Y, cfg.rho);
    s.W = prox_mel_fit(ctx, s.Y + s.U, M);
    s.Z = project_consistency(like(s.Z, s.X.data - s.V.data));
    s.Y = update_Y_joint(s.X.data.cwiseAbs(), s.W - s.U, cfg.rho);
    s.V.data += s.Z.data - s.X.data;
    s.U += s.Y - s.W;
    if (tracer.due(k, cfg.iters)) tracer.record(k, s.Z.data, &s.Y);
  }

  AlgoResult res;
  res.final_primal_residual_z = (s.Z.data - s.X.data).norm();
  res.final_primal_residual_y = (s.Y - s.W).norm();
  res.Z = s.Z;
  s.iteration = cfg.iters;
  res.state = std::move(s);
  res.trace = tracer.take();
  return res;
}

} // namespace melinv
