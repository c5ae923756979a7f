// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sedfpd/dataio.h"
#include "sedfpd/error.h"

namespace sedfpd {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t rd16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t rd32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::string wav_header(std::uint16_t format, int channels, int rate, int bits,
                       std::uint32_t data_bytes) {
  std::string h;
  h += "RIFF";
  put32(h, 36 + data_bytes);
  h += "WAVEfmt ";
  put32(h, 16);
  put16(h, format);
  put16(h, static_cast<std::uint16_t>(channels));
  put32(h, static_cast<std::uint32_t>(rate));
  put32(h, static_cast<std::uint32_t>(rate * channels * bits / 8));
  put16(h, static_cast<std::uint16_t>(channels * bits / 8));
  put16(h, static_cast<std::uint16_t>(bits));
  h += "data";
  put32(h, data_bytes);
  return h;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

Clip load_clip(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open audio: " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ValidationError(path + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = rd32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + len > n) throw ValidationError(path + ": truncated fmt chunk");
      format = rd16(chunk + 8);
      channels = rd16(chunk + 10);
      rate = rd32(chunk + 12);
      bits = rd16(chunk + 22);
      if (format == kFormatExtensible) {
        if (len < 40) throw ValidationError(path + ": truncated extensible fmt chunk");
        format = rd16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + len > n) throw ValidationError(path + ": truncated data chunk");
      data = chunk + 8;
      data_len = len;
      break;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) throw ValidationError(path + ": missing fmt chunk");
  if (data == nullptr) throw ValidationError(path + ": missing or truncated data chunk");
  if (channels == 0) throw ValidationError(path + ": zero channels");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw ValidationError(path + ": unsupported encoding (format " + std::to_string(format) +
                          ", " + std::to_string(bits) + " bits); need PCM16 or float32");
  if (static_cast<int>(rate) != expected_rate)
    throw ValidationError(path + ": sample rate " + std::to_string(rate) + " Hz, expected " +
                          std::to_string(expected_rate) + " Hz (no resampling)");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  if (data_len % frame_bytes != 0) throw ValidationError(path + ": truncated sample frame");
  const std::size_t frames = data_len / frame_bytes;

  Clip clip;
  clip.id = clip_id_from_path(path);
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* p = data + i * frame_bytes;
    if (pcm16) {
      clip.samples[i] = static_cast<std::int16_t>(rd16(p)) / 32768.0;
    } else {
      const std::uint32_t u = rd32(p);
      float f;
      std::memcpy(&f, &u, sizeof f);
      if (!std::isfinite(f)) throw ValidationError(path + ": non-finite float sample");
      clip.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
  }
  return clip;
}

void write_wav_pcm16(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  std::string bytes = wav_header(kFormatPcm, 1, sample_rate, 16,
                                 static_cast<std::uint32_t>(samples.size() * 2));
  bytes.reserve(bytes.size() + samples.size() * 2);
  for (double s : samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put16(bytes, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  write_file(path, bytes);
}

void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       int sample_rate, int channels) {
  std::string bytes = wav_header(kFormatFloat, channels, sample_rate, 32,
                                 static_cast<std::uint32_t>(samples.size() * 4));
  for (double s : samples) {
    const float f = static_cast<float>(s);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    put32(bytes, u);
  }
  write_file(path, bytes);
}

}  // namespace sedfpd
