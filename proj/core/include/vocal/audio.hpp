#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vocal {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kFrameSamples = 400;  // 25 ms
inline constexpr std::size_t kHopSamples = 160;    // 10 ms

/// Mono PCM16 utterance at 16 kHz.
struct AudioClip {
  std::vector<std::int16_t> samples;
  int sample_rate = kSampleRate;

  bool operator==(const AudioClip&) const = default;
};

/// Throws Error{UnsupportedFormat} if the rate is not 16 kHz.
void validate_clip(const AudioClip& clip);

/// Parses a RIFF/WAVE file. Only PCM, 16-bit, mono, 16 kHz is accepted;
/// anything else raises Error{UnsupportedFormat}, structural damage Error{Parse}.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

AudioClip read_wav_file(const std::filesystem::path& path);
void write_wav_file(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace vocal
