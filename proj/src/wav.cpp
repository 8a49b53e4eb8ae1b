/* wav.cpp  RIFF/WAVE reader and writer, PCM16 + float32.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/wav.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace melinv {
namespace {

static_assert(std::endian::native == std::endian::little,
              "wav i/o assumes a little-endian host");

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

} // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("wav: cannot open " + path.string());

  std::array<char, 4> tag{};
  in.read(tag.data(), 4);
  if (std::memcmp(tag.data(), "RIFF", 4) != 0) throw InvalidInput("wav: not RIFF");
  read_le<std::uint32_t>(in); // riff size, unused
  in.read(tag.data(), 4);
  if (std::memcmp(tag.data(), "WAVE", 4) != 0) throw InvalidInput("wav: not WAVE");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<char> payload;

  while (in.read(tag.data(), 4)) {
    const std::uint32_t size = read_le<std::uint32_t>(in);
    if (!in) break;
    if (std::memcmp(tag.data(), "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(in);
      channels = read_le<std::uint16_t>(in);
      sample_rate = read_le<std::uint32_t>(in);
      read_le<std::uint32_t>(in); // byte rate
      read_le<std::uint16_t>(in); // block align
      bits = read_le<std::uint16_t>(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      if (format == kFormatExtensible) {
        // Good enough for the corpora we ingest: trust the bit depth.
        format = bits == 32 ? kFormatFloat : kFormatPcm;
      }
      have_fmt = true;
    } else if (std::memcmp(tag.data(), "data", 4) == 0) {
      payload.resize(size);
      in.read(payload.data(), size);
      break;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur); // chunks are word aligned
    }
  }

  if (!have_fmt || payload.empty()) throw InvalidInput("wav: missing fmt or data chunk");
  if (channels < 1) throw InvalidInput("wav: zero channels");
  if (sample_rate == 0) throw InvalidInput("wav: zero sample rate");

  WavData out;
  out.channels_in_file = channels;
  out.signal.sample_rate = static_cast<int>(sample_rate);

  if (format == kFormatPcm && bits == 16) {
    const size_t total = payload.size() / 2;
    const size_t frames = total / channels;
    out.signal.samples.resize(frames);
    const auto* raw = reinterpret_cast<const std::int16_t*>(payload.data());
    for (size_t i = 0; i < frames; ++i)
      out.signal.samples[i] = raw[i * channels] / 32768.0;
  } else if (format == kFormatFloat && bits == 32) {
    const size_t total = payload.size() / 4;
    const size_t frames = total / channels;
    out.signal.samples.resize(frames);
    const auto* raw = reinterpret_cast<const float*>(payload.data());
    for (size_t i = 0; i < frames; ++i)
      out.signal.samples[i] = static_cast<double>(raw[i * channels]);
  } else {
    throw InvalidInput("wav: unsupported format (want PCM16 or float32)");
  }
  if (out.signal.samples.empty()) throw InvalidInput("wav: no samples");
  return out;
}

void write_wav_float32(const std::filesystem::path& path, const Signal& signal) {
  if (signal.samples.empty()) throw InvalidInput("wav: refusing to write empty signal");
  if (signal.sample_rate <= 0) throw InvalidInput("wav: bad sample rate");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("wav: cannot write " + path.string());

  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(signal.samples.size() * 4);
  const std::uint32_t sr = static_cast<std::uint32_t>(signal.sample_rate);

  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, kFormatFloat);
  write_le<std::uint16_t>(out, 1); // mono
  write_le<std::uint32_t>(out, sr);
  write_le<std::uint32_t>(out, sr * 4);
  write_le<std::uint16_t>(out, 4);
  write_le<std::uint16_t>(out, 32);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);
  for (double v : signal.samples) write_le<float>(out, static_cast<float>(v));
  if (!out) throw InvalidInput("wav: write failed for " + path.string());
}

} // namespace melinv
