#include "vocal/audio.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "vocal/error.hpp"

namespace vocal {

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

void validate_clip(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw Error(ErrorCode::UnsupportedFormat,
                "sample rate " + std::to_string(clip.sample_rate) + " Hz, expected 16000");
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw Error(ErrorCode::Parse, "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) throw Error(ErrorCode::Parse, "truncated WAV chunk");

    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw Error(ErrorCode::Parse, "short fmt chunk");
      const auto format = read_u16(bytes, body);
      const auto channels = read_u16(bytes, body + 2);
      const auto rate = read_u32(bytes, body + 4);
      const auto bits = read_u16(bytes, body + 14);
      if (format != 1) throw Error(ErrorCode::UnsupportedFormat, "WAV is not integer PCM");
      if (channels != 1) throw Error(ErrorCode::UnsupportedFormat, "WAV is not mono");
      if (rate != static_cast<std::uint32_t>(kSampleRate))
        throw Error(ErrorCode::UnsupportedFormat, "WAV sample rate is not 16000 Hz");
      if (bits != 16) throw Error(ErrorCode::UnsupportedFormat, "WAV is not 16-bit");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorCode::Parse, "data chunk before fmt chunk");
      if (size % 2 != 0) throw Error(ErrorCode::Parse, "odd PCM16 data length");
      AudioClip clip;
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i)
        clip.samples[i] = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorCode::Parse, have_fmt ? "WAV has no data chunk" : "WAV has no fmt chunk");
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  validate_clip(clip);
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  auto tag = [&out](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  put_u32(out, 36 + data_size);
  tag("WAVE");
  tag("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, kSampleRate);
  put_u32(out, kSampleRate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  tag("data");
  put_u32(out, data_size);
  for (std::int16_t s : clip.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

AudioClip read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void write_wav_file(const std::filesystem::path& path, const AudioClip& clip) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Storage, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace vocal
