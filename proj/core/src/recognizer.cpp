#include "vocal/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vocal/error.hpp"

namespace vocal {

namespace {

// prefix[t] = sum of squared feature values over frames [0, t).
std::vector<double> frame_energy_prefix(const FeatureSequence& seq) {
  std::vector<double> prefix(seq.frames() + 1, 0.0);
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    double e = 0.0;
    for (double v : seq.frame(t)) e += v * v;
    prefix[t + 1] = prefix[t] + e;
  }
  return prefix;
}

}  // namespace

double xcorr_score(const FeatureSequence& x, const FeatureSequence& y, std::size_t max_shift) {
  if (!x.normalized() || !y.normalized())
    throw Error(ErrorCode::NotNormalized, "xcorr_score requires normalised feature sequences");
  if (x.empty() || y.empty()) throw Error(ErrorCode::Validation, "empty feature sequence");

  const auto tx = static_cast<std::ptrdiff_t>(x.frames());
  const auto ty = static_cast<std::ptrdiff_t>(y.frames());
  const std::ptrdiff_t min_overlap = std::min<std::ptrdiff_t>(10, std::min(tx, ty));
  const auto shift_limit =
      static_cast<std::ptrdiff_t>(std::min<std::size_t>(max_shift, x.frames() + y.frames()));

  const auto px = frame_energy_prefix(x);
  const auto py = frame_energy_prefix(y);
  const double* xv = x.values().data();
  const double* yv = y.values().data();
  constexpr auto D = static_cast<std::ptrdiff_t>(FeatureSequence::kDims);

  double best = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t s = -shift_limit; s <= shift_limit; ++s) {
    const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -s);
    const std::ptrdiff_t t1 = std::min(tx, ty - s);
    if (t1 - t0 < min_overlap) continue;

    // Overlapping rows are contiguous in both matrices.
    const double* a = xv + t0 * D;
    const double* b = yv + (t0 + s) * D;
    const std::ptrdiff_t n = (t1 - t0) * D;
    double dot = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) dot += a[i] * b[i];

    const double nx = px[t1] - px[t0];
    const double ny = py[t1 + s] - py[t0 + s];
    const double r = (nx > 0.0 && ny > 0.0) ? dot / std::sqrt(nx * ny) : 0.0;
    best = std::max(best, r);
  }
  // Shift 0 always has an admissible overlap, so best is finite here.
  return best;
}

void TemplateSet::insert(Template tpl) {
  if (!tpl.features.normalized())
    throw Error(ErrorCode::NotNormalized, "template '" + tpl.item_id + "' is not normalised");
  if (tpl.features.empty())
    throw Error(ErrorCode::Validation, "template '" + tpl.item_id + "' has no frames");
  auto id = tpl.item_id;
  templates_.insert_or_assign(std::move(id), std::move(tpl));
}

const Template* TemplateSet::find(std::string_view item_id) const noexcept {
  auto it = templates_.find(item_id);
  return it == templates_.end() ? nullptr : &it->second;
}

TemplateSet TemplateSet::subset(std::span<const std::string> ids) const {
  TemplateSet out;
  for (const auto& id : ids) {
    const Template* tpl = find(id);
    if (!tpl) throw Error(ErrorCode::NotFound, "no template for item '" + id + "'");
    out.templates_.insert_or_assign(id, *tpl);
  }
  return out;
}

RecognitionResult classify(const FeatureSequence& utterance, const TemplateSet& candidates,
                           double reject_threshold) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidateSet, "no candidate templates");
  if (!utterance.normalized())
    throw Error(ErrorCode::NotNormalized, "utterance features are not normalised");

  RecognitionResult result;
  const std::string* best_id = nullptr;
  double best = -std::numeric_limits<double>::infinity();
  // Map iteration is in ascending id order, so strict '>' keeps the smallest
  // id among equal scores.
  for (const auto& [id, tpl] : candidates) {
    const std::size_t tu = utterance.frames();
    const std::size_t tt = tpl.features.frames();
    const std::size_t window = (tu > tt ? tu - tt : tt - tu) + kShiftSlackFrames;
    const double score = xcorr_score(utterance, tpl.features, window);
    result.per_candidate_scores.emplace(id, score);
    if (score > best) {
      best = score;
      best_id = &id;
    }
  }
  result.best_score = best;
  if (best >= reject_threshold) result.accepted_item = *best_id;
  return result;
}

double loudness_dbfs(const AudioClip& clip) {
  validate_clip(clip);
  if (clip.samples.empty()) return kSilenceDbfs;
  double sum = 0.0;
  for (std::int16_t s : clip.samples) sum += static_cast<double>(s) * s;
  const double rms = std::sqrt(sum / static_cast<double>(clip.samples.size()));
  if (rms <= 0.0) return kSilenceDbfs;
  return std::max(kSilenceDbfs, 20.0 * std::log10(rms / 32768.0));
}

}  // namespace vocal
