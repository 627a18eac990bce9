#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "grucnn/common.hpp"

namespace grucnn::dsp {

inline constexpr int kSampleRate = 16000;

/// Mono audio at 16 kHz with samples nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
};

/// Number of samples clipped to [-1, 1] by synthesis routines in this process.
inline std::atomic<std::uint64_t>& clip_warning_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

/// Clamps in place to [-1, 1]; returns how many samples were changed.
inline std::size_t clip_to_unit(AudioClip& clip) {
  std::size_t clipped = 0;
  for (double& s : clip.samples) {
    if (s > 1.0 || s < -1.0) {
      s = std::clamp(s, -1.0, 1.0);
      ++clipped;
    }
  }
  if (clipped) {
    clip_warning_count() += clipped;
    log_info("clipped ", clipped, " samples to [-1, 1]");
  }
  return clipped;
}

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Quantizes one sample to PCM-16: round half away from zero of x * 32768,
/// saturated to [-32768, 32767].
inline std::int16_t quantize_pcm16(double x) {
  const double scaled = std::round(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

/// Parses a RIFF/WAVE byte buffer. Only 16-bit PCM, mono, 16 kHz is accepted.
inline AudioClip decode_wav(const std::string& bytes, const std::string& origin = "<memory>") {
  auto fail = [&](const std::string& why) { throw ContractError(str_cat(origin, ": ", why)); };
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    fail("not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = p + pos;
    const std::uint32_t len = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + len > bytes.size()) fail("truncated fmt chunk");
      format = detail::read_u16(p + body);
      channels = detail::read_u16(p + body + 2);
      rate = detail::read_u32(p + body + 4);
      bits = detail::read_u16(p + body + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real format in its sub-format GUID.
      if (format == 0xFFFE && len >= 26) format = detail::read_u16(p + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = p + body;
      data_len = std::min<std::size_t>(len, bytes.size() - body);
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");
  if (format != 1) fail(str_cat("unsupported encoding (format tag ", format, "); PCM required"));
  if (channels != 1) fail(str_cat("unsupported channel count ", channels, "; mono required"));
  if (bits != 16) fail(str_cat("unsupported bit depth ", bits, "; 16-bit required"));
  if (rate != static_cast<std::uint32_t>(kSampleRate))
    fail(str_cat("unsupported sample rate ", rate, " Hz; ", kSampleRate, " Hz required"));

  AudioClip clip;
  clip.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(detail::read_u16(data + 2 * i));
    clip.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return clip;
}

inline std::string encode_wav(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw ContractError(str_cat("encode_wav: unsupported sample rate ", clip.sample_rate, " Hz"));
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  detail::put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, kSampleRate);
  detail::put_u32(out, kSampleRate * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, data_bytes);
  for (double s : clip.samples) detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(s)));
  return out;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError(str_cat("cannot open ", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError(str_cat("cannot write ", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeError(str_cat("write failed for ", path.string()));
}

inline AudioClip load_wav(const std::filesystem::path& path) {
  return decode_wav(read_file_bytes(path), path.string());
}

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  write_file_bytes(path, encode_wav(clip));
}

}  // namespace grucnn::dsp
