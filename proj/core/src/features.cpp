#include <array>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "vocal/error.hpp"
#include "vocal/recognizer.hpp"

namespace vocal {

FeatureSequence::FeatureSequence(std::size_t frames, std::vector<double> values, bool normalized)
    : frames_(frames), values_(std::move(values)), normalized_(normalized) {
  if (values_.size() != frames_ * kDims)
    throw Error(ErrorCode::Validation, "feature matrix size does not match frames x dims");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::Validation, "non-finite feature value");
}

FeatureSequence FeatureSequence::z_normalized() const {
  std::vector<double> out(values_.size(), 0.0);
  if (frames_ == 0) return FeatureSequence(0, std::move(out), true);
  const double n = static_cast<double>(frames_);
  for (std::size_t d = 0; d < kDims; ++d) {
    double mean = 0.0;
    for (std::size_t t = 0; t < frames_; ++t) mean += at(t, d);
    mean /= n;
    double var = 0.0;
    for (std::size_t t = 0; t < frames_; ++t) {
      const double c = at(t, d) - mean;
      var += c * c;
    }
    var /= n;
    // Rounding leaves a constant column with variance ~1e-30, not 0.
    if (var <= 1e-20 * (1.0 + mean * mean)) continue;
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t t = 0; t < frames_; ++t) out[t * kDims + d] = (at(t, d) - mean) * inv_sd;
  }
  return FeatureSequence(frames_, std::move(out), true);
}

namespace {

constexpr std::size_t kBins = kFrameSamples / 2 + 1;
constexpr std::size_t kSpectralBands = 8;
constexpr double kBandWidthHz = 1000.0;
// Samples enter the energies as fractions of full scale.
constexpr double kFullScale = 32768.0;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FramePlan {
 public:
  FramePlan() {
    in_ = fftw_alloc_real(kFrameSamples);
    out_ = fftw_alloc_complex(kBins);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFrameSamples), in_, out_, FFTW_ESTIMATE);
  }
  ~FramePlan() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  FramePlan(const FramePlan&) = delete;
  FramePlan& operator=(const FramePlan&) = delete;

  double* input() { return in_; }
  // |X_k|^2 for k = 0..N/2
  void power_spectrum(std::array<double, kBins>& power) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k < kBins; ++k)
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

const std::array<double, kFrameSamples>& hann_window() {
  static const auto window = [] {
    std::array<double, kFrameSamples> w{};
    for (std::size_t n = 0; n < kFrameSamples; ++n)
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(kFrameSamples - 1));
    return w;
  }();
  return window;
}

std::size_t band_of_bin(std::size_t k) {
  const double hz = static_cast<double>(k) * kSampleRate / static_cast<double>(kFrameSamples);
  return std::min(kSpectralBands - 1, static_cast<std::size_t>(hz / kBandWidthHz));
}

}  // namespace

FeatureSequence extract_raw_features(const AudioClip& clip) {
  validate_clip(clip);
  if (clip.samples.size() < kFrameSamples)
    throw Error(ErrorCode::TooShort, "clip has " + std::to_string(clip.samples.size()) +
                                         " samples, need at least 400");
  const std::size_t frames = 1 + (clip.samples.size() - kFrameSamples) / kHopSamples;
  std::vector<double> values(frames * FeatureSequence::kDims, 0.0);

  thread_local FramePlan plan;
  const auto& window = hann_window();
  std::array<double, kBins> power{};

  for (std::size_t t = 0; t < frames; ++t) {
    const std::int16_t* s = clip.samples.data() + t * kHopSamples;
    double* row = values.data() + t * FeatureSequence::kDims;

    double energy = 0.0;
    std::size_t crossings = 0;
    for (std::size_t n = 0; n < kFrameSamples; ++n) {
      const double v = s[n] / kFullScale;
      energy += v * v;
      if (n > 0 && ((s[n - 1] >= 0) != (s[n] >= 0))) ++crossings;
      plan.input()[n] = v * window[n];
    }
    row[0] = std::log1p(energy);
    row[1] = static_cast<double>(crossings) / static_cast<double>(kFrameSamples - 1);

    plan.power_spectrum(power);
    std::array<double, kSpectralBands> bands{};
    for (std::size_t k = 0; k < kBins; ++k) bands[band_of_bin(k)] += power[k];
    for (std::size_t b = 0; b < kSpectralBands; ++b) row[2 + b] = std::log1p(bands[b]);
  }
  return FeatureSequence(frames, std::move(values), false);
}

FeatureSequence extract_features(const AudioClip& clip) {
  return extract_raw_features(clip).z_normalized();
}

}  // namespace vocal
