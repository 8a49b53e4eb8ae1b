/* stft.hpp  STFT analysis/synthesis pair and the consistency projection.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <vector>

#include "melinv/errors.hpp"

namespace melinv {

/// Time-domain signal: float64 samples at a fixed rate.
struct Signal {
  std::vector<double> samples;
  int sample_rate = 16000;
};

/// Analysis/synthesis geometry. The window is a periodic Hann window and
/// frames are taken from a zero-padded copy of the signal, so the analysis
/// operator is linear and the consistency projection is exact.
///
/// Geometry rules enforced by validate():
///   * 0 < hop_length, window_length == fft_size
///   * window_length >= 2 * hop_length  (redundancy of at least 2)
///   * the hop-periodic sum of squared window values is positive
///     everywhere, so the canonical dual window exists
struct StftConfig {
  int window_length = 1024;
  int hop_length = 256;
  int fft_size = 1024;

  int num_bins() const { return fft_size / 2 + 1; }

  /// Throws InvalidInput if the geometry breaks any rule above.
  void validate() const;

  static StftConfig from_window_hop(int window_length, int hop_length) {
    return StftConfig{window_length, hop_length, window_length};
  }

  bool operator==(const StftConfig&) const = default;
};

/// One-sided complex spectrogram, num_bins() x frames.
///
/// signal_length carries the length of the analysed signal so that istft can
/// trim its synthesis padding; kUnknownLength means "not known", in which
/// case istft returns the full padded buffer.
struct Spectrogram {
  static constexpr Eigen::Index kUnknownLength = -1;

  Eigen::MatrixXcd data;
  StftConfig config;
  int sample_rate = 16000;
  Eigen::Index signal_length = kUnknownLength;

  Eigen::Index bins() const { return data.rows(); }
  Eigen::Index frames() const { return data.cols(); }
  bool has_signal_length() const { return signal_length >= 0; }
};

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / length).
std::vector<double> hann_window(int length);

/// Number of frames produced for a signal of n samples.
Eigen::Index frame_count(Eigen::Index n, const StftConfig& config);

/// Largest signal length that yields exactly `frames` analysis frames.
/// Used to pick a concrete signal length when only a spectrogram/mel frame
/// count is known. Throws InvalidInput if no positive length exists.
Eigen::Index default_signal_length(Eigen::Index frames, const StftConfig& config);

/// One-sided STFT with zero padding of (window - hop) samples on the left
/// and enough on the right that every frame lies inside the padded buffer.
/// Frame t covers padded samples [t*hop, t*hop + window).
Spectrogram stft(const Signal& signal, const StftConfig& config);

/// Overlap-add synthesis with the canonical dual window
/// w~[n] = w[n] / sum_k w[n + k*hop]^2. For spec = stft(x) this returns x
/// up to rounding. When the original length is unknown the full padded
/// buffer is returned.
Signal istft(const Spectrogram& spec);

/// Projection onto the image of STFT: stft(istft(spec)). Idempotent, and an
/// orthogonal projection under the inner product of spectral_inner().
Spectrogram project_consistency(const Spectrogram& spec);

/// Real inner product of two one-sided spectrograms, equal to the Frobenius
/// inner product of the underlying two-sided spectra: interior bins are
/// counted twice, DC (and Nyquist, for even fft sizes) once.
double spectral_inner(const Spectrogram& a, const Spectrogram& b);

/// Norm induced by spectral_inner().
double spectral_norm(const Spectrogram& a);

} // namespace melinv
