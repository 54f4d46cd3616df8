#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "vocal/error.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/rng.hpp"

namespace vocal {

namespace {

// A sine whose frequency glides linearly from start_hz to end_hz across its
// raised-cosine envelope.
struct Tone {
  double start_hz;
  double end_hz;
  double phase;
  double amplitude;  // fraction of full scale
  double center_s;
  double half_width_s;
};

std::array<Tone, 3> tones_for(std::string_view item_id) {
  Rng rng(fnv1a64(item_id));
  std::array<Tone, 3> tones{};
  for (auto& tone : tones) {
    tone.start_hz = rng.uniform(200.0, 7800.0);
    tone.end_hz = rng.uniform(200.0, 7800.0);
    tone.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    tone.amplitude = rng.uniform(0.15, 0.30);
    tone.center_s = rng.uniform(0.12, 0.38);
    tone.half_width_s = rng.uniform(0.10, 0.20);
  }
  return tones;
}

}  // namespace

AudioClip synth_utterance(std::string_view item_id, std::uint64_t seed, double noise_sigma) {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(ErrorCode::Range, "noise_sigma must be finite and >= 0");

  const auto tones = tones_for(item_id);
  std::vector<double> clean(kSynthSamples, 0.0);
  for (const auto& tone : tones) {
    double phase = tone.phase;
    for (std::size_t n = 0; n < kSynthSamples; ++n) {
      const double t = static_cast<double>(n) / kSampleRate;
      const double u = (t - tone.center_s) / tone.half_width_s;
      const double frac = std::clamp(0.5 * (u + 1.0), 0.0, 1.0);
      phase += 2.0 * std::numbers::pi * (tone.start_hz + (tone.end_hz - tone.start_hz) * frac) /
               kSampleRate;
      if (u <= -1.0 || u >= 1.0) continue;
      const double env = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
      clean[n] += tone.amplitude * env * std::sin(phase);
    }
  }
  double sum_sq = 0.0;
  for (auto& v : clean) {
    v = std::round(32767.0 * v);
    sum_sq += v * v;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(kSynthSamples));

  AudioClip clip;
  clip.samples.resize(kSynthSamples);
  Rng noise(mix_seed(seed, fnv1a64(item_id)));
  const double sd = noise_sigma * rms;
  for (std::size_t n = 0; n < kSynthSamples; ++n) {
    double v = clean[n];
    if (sd > 0.0) v += sd * noise.gaussian();
    clip.samples[n] = static_cast<std::int16_t>(std::clamp(std::round(v), -32768.0, 32767.0));
  }
  return clip;
}

Template synth_template(std::string_view item_id) {
  return Template{std::string(item_id), extract_features(synth_utterance(item_id, 0, 0.0))};
}

}  // namespace vocal
