#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocal/audio.hpp"

namespace vocal {

/// T x 10 matrix of per-frame acoustic features, stored row-major.
///
/// Dimensions per frame: log energy, zero-crossing rate, then eight
/// log-compressed band energies over 0-8 kHz in 1 kHz steps.
class FeatureSequence {
 public:
  static constexpr std::size_t kDims = 10;
  static constexpr int kFrameMs = 25;
  static constexpr int kHopMs = 10;

  FeatureSequence() = default;
  /// `values.size()` must equal frames * kDims and every value must be finite.
  FeatureSequence(std::size_t frames, std::vector<double> values, bool normalized);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t dims() const noexcept { return kDims; }
  bool normalized() const noexcept { return normalized_; }
  bool empty() const noexcept { return frames_ == 0; }

  double at(std::size_t t, std::size_t d) const { return values_[t * kDims + d]; }
  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(values_).subspan(t * kDims, kDims);
  }
  std::span<const double> values() const noexcept { return values_; }

  /// Per-dimension z-normalisation across frames; dimensions with zero
  /// variance become all-zero so the width stays fixed.
  FeatureSequence z_normalized() const;

  bool operator==(const FeatureSequence&) const = default;

 private:
  std::size_t frames_ = 0;
  std::vector<double> values_;
  bool normalized_ = false;
};

/// Raw (un-normalised) per-frame features. Throws Error{TooShort} below one
/// full 400-sample frame.
FeatureSequence extract_raw_features(const AudioClip& clip);
/// extract_raw_features followed by z-normalisation.
FeatureSequence extract_features(const AudioClip& clip);

/// Maximum normalised cross-correlation coefficient over integer frame shifts
/// in [-max_shift, max_shift]. Shifts whose overlap is shorter than
/// min(10, min(Tx, Ty)) frames are skipped. Result lies in [-1, 1].
/// Throws Error{NotNormalized} unless both inputs are normalised.
double xcorr_score(const FeatureSequence& x, const FeatureSequence& y, std::size_t max_shift);

inline constexpr double kDefaultRejectThreshold = 0.55;
inline constexpr std::size_t kShiftSlackFrames = 10;

struct Template {
  std::string item_id;
  FeatureSequence features;
};

/// One template per item id; templates are normalised on insertion.
class TemplateSet {
 public:
  TemplateSet() = default;

  /// Replaces any existing template for the id. Throws Error{NotNormalized}.
  void insert(Template tpl);
  const Template* find(std::string_view item_id) const noexcept;
  bool contains(std::string_view item_id) const noexcept { return find(item_id) != nullptr; }
  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }

  /// Sub-set restricted to `ids`; throws Error{NotFound} for a missing id.
  TemplateSet subset(std::span<const std::string> ids) const;

  auto begin() const noexcept { return templates_.begin(); }
  auto end() const noexcept { return templates_.end(); }

 private:
  std::map<std::string, Template, std::less<>> templates_;
};

struct RecognitionResult {
  /// Set when accepted; the decision is Rejected otherwise.
  std::optional<std::string> accepted_item;
  double best_score = 0.0;
  std::map<std::string, double> per_candidate_scores;
  /// Absent when the attempt arrived as pre-extracted features.
  std::optional<double> loudness_dbfs;

  bool accepted() const noexcept { return accepted_item.has_value(); }
  bool operator==(const RecognitionResult&) const = default;
};

/// Closed-set decision over `candidates`. Each candidate is scored with a
/// shift window of |T_utt - T_tpl| + 10 frames; ties go to the
/// lexicographically smallest id. Throws Error{EmptyCandidateSet}.
RecognitionResult classify(const FeatureSequence& utterance, const TemplateSet& candidates,
                           double reject_threshold = kDefaultRejectThreshold);

/// 20*log10(RMS/32768), floored at -96 dBFS.
double loudness_dbfs(const AudioClip& clip);
inline constexpr double kSilenceDbfs = -96.0;

inline constexpr std::size_t kSynthSamples = kSampleRate / 2;

/// Deterministic 0.5 s test utterance for an item: three enveloped sine
/// glides whose frequencies, envelopes and levels derive from a hash of the
/// id, plus Gaussian noise with standard deviation noise_sigma * RMS(clean signal).
/// The clean part depends only on item_id; the seed drives the noise.
AudioClip synth_utterance(std::string_view item_id, std::uint64_t seed, double noise_sigma);

/// Template for an item from its clean synthetic utterance.
Template synth_template(std::string_view item_id);

}  // namespace vocal
