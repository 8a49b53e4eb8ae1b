/* matrix_io.hpp  File exchange for mel matrices and filterbanks.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "melinv/mel.hpp"
#include "melinv/stft.hpp"

namespace melinv {

/// Mel-spectrogram bundle read from a JSON sidecar. The sidecar names the
/// data file (CSV, or raw row-major float64 binary) and pins the geometry:
///   { "bands": B, "frames": T, "sample_rate": sr,
///     "window_length": w, "hop_length": h, "data": "clip.f64" }
struct MelBundle {
  MelGram M;
  int sample_rate = 16000;
  StftConfig stft;
};

MelBundle read_mel_bundle(const std::filesystem::path& sidecar_path);

/// Writes <base>.f64 + <base>.json next to each other; `base` must not have
/// an extension. binary=false writes <base>.csv instead of the f64 file.
void write_mel_bundle(const std::filesystem::path& base, const MelBundle& bundle,
                      bool binary = true);

/// Filterbank matrix exchange. CSV files start with a header line
///   # bands=B bins=F sample_rate=sr f_min=a f_max=b
/// followed by B rows. Binary files carry the same header fields as
/// little-endian int64/float64 values ahead of the row-major matrix.
void write_filterbank(const std::filesystem::path& path, const MelFilterbank& fb,
                      bool binary = false);
MelFilterbank read_filterbank(const std::filesystem::path& path);

/// Plain dense matrix as CSV, one row per line. Values are written with
/// shortest round-trip formatting, so read(write(M)) == M exactly.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

} // namespace melinv
