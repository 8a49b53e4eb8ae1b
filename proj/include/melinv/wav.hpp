/* wav.hpp  Minimal WAV reader/writer (PCM16 and float32).
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <filesystem>
#include <string>

#include "melinv/stft.hpp"

namespace melinv {

struct WavData {
  Signal signal;            // first channel only
  int channels_in_file = 1; // warn upstream when > 1
};

/// Reads 16-bit PCM or 32-bit float WAV. Multichannel files are reduced to
/// their first channel. Throws InvalidInput on malformed or unsupported
/// files.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 32-bit float WAV (no quantization of the reconstruction).
void write_wav_float32(const std::filesystem::path& path, const Signal& signal);

} // namespace melinv
