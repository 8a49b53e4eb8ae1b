/* stft.cpp  STFT analysis/synthesis with canonical dual window.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace melinv {
namespace {

// Process-wide plan cache. FFTW planning is not reentrant, execution via the
// new-array interface is. Plans are created once per size with FFTW_ESTIMATE
// so plan selection is deterministic.
class FftPlans {
public:
  struct Pair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
  };

  static Pair get(int n) {
    static FftPlans instance;
    std::lock_guard<std::mutex> lock(instance.mutex_);
    auto it = instance.plans_.find(n);
    if (it != instance.plans_.end()) return it->second;

    double* re = fftw_alloc_real(static_cast<size_t>(n));
    fftw_complex* cx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    Pair p;
    p.r2c = fftw_plan_dft_r2c_1d(n, re, cx, FFTW_ESTIMATE);
    p.c2r = fftw_plan_dft_c2r_1d(n, cx, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(cx);
    instance.plans_.emplace(n, p);
    return p;
  }

private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.r2c);
      fftw_destroy_plan(p.c2r);
    }
  }

  std::mutex mutex_;
  std::map<int, Pair> plans_;
};

// Per-call scratch, fftw-aligned so the cached plans apply.
struct FftScratch {
  explicit FftScratch(int n)
      : n(n), re(fftw_alloc_real(static_cast<size_t>(n))),
        cx(fftw_alloc_complex(static_cast<size_t>(n / 2 + 1))) {}
  ~FftScratch() {
    fftw_free(re);
    fftw_free(cx);
  }
  FftScratch(const FftScratch&) = delete;
  FftScratch& operator=(const FftScratch&) = delete;

  int n;
  double* re;
  fftw_complex* cx;
};

Eigen::Index pad_left_of(const StftConfig& c) {
  return c.window_length - c.hop_length;
}

Eigen::Index padded_length_of(Eigen::Index frames, const StftConfig& c) {
  return (frames - 1) * c.hop_length + c.window_length;
}

// Analysis of a fully padded buffer: frame t covers [t*hop, t*hop + window).
Eigen::MatrixXcd analyze_buffer(const Eigen::VectorXd& buffer, Eigen::Index frames,
                                const StftConfig& c) {
  const int n = c.fft_size;
  const int bins = c.num_bins();
  const std::vector<double> window = hann_window(c.window_length);
  const auto plans = FftPlans::get(n);
  FftScratch scratch(n);

  Eigen::MatrixXcd out(bins, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double* seg = buffer.data() + t * c.hop_length;
    for (int i = 0; i < c.window_length; ++i) scratch.re[i] = seg[i] * window[i];
    fftw_execute_dft_r2c(plans.r2c, scratch.re, scratch.cx);
    for (int k = 0; k < bins; ++k)
      out(k, t) = std::complex<double>(scratch.cx[k][0], scratch.cx[k][1]);
  }
  return out;
}

// Canonical dual overlap-add over the full padded buffer. Samples with zero
// window overlap (possible only at the buffer edges) are set to zero, which
// matches the pseudoinverse of the analysis operator.
Eigen::VectorXd synthesize_buffer(const Eigen::MatrixXcd& data, const StftConfig& c) {
  const int n = c.fft_size;
  const int bins = c.num_bins();
  const Eigen::Index frames = data.cols();
  const Eigen::Index total = padded_length_of(frames, c);
  const std::vector<double> window = hann_window(c.window_length);
  const auto plans = FftPlans::get(n);
  FftScratch scratch(n);
  const bool even = (n % 2 == 0);

  Eigen::VectorXd num = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(total);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      scratch.cx[k][0] = data(k, t).real();
      scratch.cx[k][1] = data(k, t).imag();
    }
    // c2r assumes a Hermitian half spectrum; make the convention explicit.
    scratch.cx[0][1] = 0.0;
    if (even) scratch.cx[bins - 1][1] = 0.0;
    fftw_execute_dft_c2r(plans.c2r, scratch.cx, scratch.re);

    double* dst = num.data() + t * c.hop_length;
    double* wsum = den.data() + t * c.hop_length;
    for (int i = 0; i < c.window_length; ++i) {
      dst[i] += window[i] * scratch.re[i] * inv_n;
      wsum[i] += window[i] * window[i];
    }
  }
  for (Eigen::Index p = 0; p < total; ++p)
    num[p] = den[p] > 0.0 ? num[p] / den[p] : 0.0;
  return num;
}

void check_spec(const Spectrogram& spec) {
  spec.config.validate();
  if (spec.data.rows() != spec.config.num_bins())
    throw InvalidInput("spectrogram rows do not match config bins");
  if (spec.data.cols() < 1) throw InvalidInput("spectrogram has no frames");
  if (spec.has_signal_length() &&
      frame_count(spec.signal_length, spec.config) != spec.frames())
    throw InvalidInput("spectrogram signal_length inconsistent with frame count");
}

} // namespace

void StftConfig::validate() const {
  if (hop_length <= 0 || window_length <= 0 || fft_size <= 0)
    throw InvalidInput("stft geometry must be positive");
  if (fft_size != window_length)
    throw InvalidInput("fft_size must equal window_length");
  if (window_length < 2 * hop_length)
    throw InvalidInput("window_length/hop_length redundancy must be >= 2");
  // Hop-periodic squared-window sums must be positive for the dual window.
  const std::vector<double> w = hann_window(window_length);
  for (int j = 0; j < hop_length; ++j) {
    double s = 0.0;
    for (int i = j; i < window_length; i += hop_length) s += w[i] * w[i];
    if (!(s > 0.0)) throw InvalidInput("window overlap sum vanishes at this hop");
  }
}

std::vector<double> hann_window(int length) {
  if (length <= 0) throw InvalidInput("window length must be positive");
  std::vector<double> w(static_cast<size_t>(length));
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (int i = 0; i < length; ++i) w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(step * i);
  return w;
}

Eigen::Index frame_count(Eigen::Index n, const StftConfig& c) {
  if (n < 1) throw InvalidInput("signal must be nonempty");
  return (pad_left_of(c) + n - 1) / c.hop_length + 1;
}

Eigen::Index default_signal_length(Eigen::Index frames, const StftConfig& c) {
  if (frames < 1) throw InvalidInput("frame count must be positive");
  const Eigen::Index n = frames * c.hop_length - pad_left_of(c);
  if (n < 1 || frame_count(n, c) != frames)
    throw InvalidInput("no signal length matches this frame count");
  return n;
}

Spectrogram stft(const Signal& signal, const StftConfig& config) {
  config.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(signal.samples.size());
  if (n == 0) throw InvalidInput("stft: empty signal");
  for (double v : signal.samples)
    if (!std::isfinite(v)) throw InvalidInput("stft: non-finite sample");

  const Eigen::Index frames = frame_count(n, config);
  const Eigen::Index pad_left = pad_left_of(config);
  Eigen::VectorXd buffer = Eigen::VectorXd::Zero(padded_length_of(frames, config));
  std::copy(signal.samples.begin(), signal.samples.end(), buffer.data() + pad_left);

  Spectrogram spec;
  spec.data = analyze_buffer(buffer, frames, config);
  spec.config = config;
  spec.sample_rate = signal.sample_rate;
  spec.signal_length = n;
  return spec;
}

Signal istft(const Spectrogram& spec) {
  check_spec(spec);
  Eigen::VectorXd buffer = synthesize_buffer(spec.data, spec.config);

  Signal out;
  out.sample_rate = spec.sample_rate;
  if (spec.has_signal_length()) {
    const Eigen::Index pad_left = pad_left_of(spec.config);
    out.samples.assign(buffer.data() + pad_left,
                       buffer.data() + pad_left + spec.signal_length);
  } else {
    out.samples.assign(buffer.data(), buffer.data() + buffer.size());
  }
  return out;
}

Spectrogram project_consistency(const Spectrogram& spec) {
  check_spec(spec);
  if (spec.has_signal_length()) return stft(istft(spec), spec.config);

  // Unknown length: keep the frame grid, round-trip the padded buffer as is.
  Eigen::VectorXd buffer = synthesize_buffer(spec.data, spec.config);
  Spectrogram out;
  out.data = analyze_buffer(buffer, spec.frames(), spec.config);
  out.config = spec.config;
  out.sample_rate = spec.sample_rate;
  out.signal_length = Spectrogram::kUnknownLength;
  return out;
}

double spectral_inner(const Spectrogram& a, const Spectrogram& b) {
  if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols())
    throw InvalidInput("spectral_inner: shape mismatch");
  const bool even = (a.config.fft_size % 2 == 0);
  const Eigen::Index bins = a.data.rows();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < bins; ++k) {
    const bool half_weight = (k == 0) || (even && k == bins - 1);
    const double w = half_weight ? 1.0 : 2.0;
    acc += w * a.data.row(k).dot(b.data.row(k)).real();
  }
  return acc;
}

double spectral_norm(const Spectrogram& a) { return std::sqrt(spectral_inner(a, a)); }

} // namespace melinv
