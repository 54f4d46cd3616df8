#include "vocal/assessment.hpp"

#include <algorithm>
#include <cmath>

#include "vocal/error.hpp"

namespace vocal {

void SessionConfig::validate() const {
  auto unit_open = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0))
      throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be in (0, 1)");
  };
  unit_open(flag_threshold, "flag_threshold");
  unit_open(ema_alpha, "ema_alpha");
  unit_open(prior_proficiency, "prior_proficiency");
  unit_open(progress_threshold, "progress_threshold");
  if (!(reject_threshold >= -1.0 && reject_threshold <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "reject_threshold must be in [-1, 1]");
  if (min_attempts < 1) throw Error(ErrorCode::InvalidConfig, "min_attempts must be >= 1");
  if (progress_min_attempts_per_item < 1)
    throw Error(ErrorCode::InvalidConfig, "progress_min_attempts_per_item must be >= 1");
  if (items_per_session < 1) throw Error(ErrorCode::InvalidConfig, "items_per_session must be >= 1");
}

bool is_correct(const RecognitionResult& result, const std::string& presented_item) {
  return result.accepted_item && *result.accepted_item == presented_item;
}

double update_proficiency(double prior, bool correct, double alpha) {
  if (!(prior >= 0.0 && prior <= 1.0)) throw Error(ErrorCode::Range, "prior must be in [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Range, "alpha must be in (0, 1)");
  const double next = (1.0 - alpha) * prior + alpha * (correct ? 1.0 : 0.0);
  return std::clamp(next, 0.0, 1.0);
}

std::optional<double> confidence_index(std::optional<int> gaze_dwell_ms,
                                       std::optional<double> loudness_dbfs) {
  if (gaze_dwell_ms && *gaze_dwell_ms < 0) throw Error(ErrorCode::Range, "gaze dwell must be >= 0");
  if (loudness_dbfs && !(*loudness_dbfs <= 0.0))
    throw Error(ErrorCode::Range, "loudness must be <= 0 dBFS");

  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  std::optional<double> loud;
  std::optional<double> steady;
  if (loudness_dbfs) loud = clamp01((*loudness_dbfs + 60.0) / 40.0);
  if (gaze_dwell_ms) steady = 1.0 - clamp01(static_cast<double>(*gaze_dwell_ms) / 5000.0);

  if (loud && steady) return 0.5 * *loud + 0.5 * *steady;
  if (loud) return loud;
  return steady;
}

PupilProfile record_attempt(PupilProfile profile, const Attempt& attempt,
                            const SessionConfig& config) {
  if (attempt.item_id.empty()) throw Error(ErrorCode::Validation, "attempt without item_id");
  if (attempt.correct != is_correct(attempt.result, attempt.item_id))
    throw Error(ErrorCode::Validation, "attempt correctness disagrees with its recognition result");
  if (attempt.confidence && !(*attempt.confidence >= 0.0 && *attempt.confidence <= 1.0))
    throw Error(ErrorCode::Validation, "attempt confidence outside [0, 1]");

  auto it = profile.proficiency.find(attempt.item_id);
  const double prior = it == profile.proficiency.end() ? config.prior_proficiency : it->second;
  profile.proficiency[attempt.item_id] = update_proficiency(prior, attempt.correct, config.ema_alpha);
  profile.attempts[attempt.item_id] += 1;
  if (attempt.confidence)
    profile.confidence_history.push_back(ConfidenceSample{attempt.presented_at, *attempt.confidence});
  return profile;
}

std::vector<Flag> generate_flags(const PupilProfile& profile, const SessionConfig& config,
                                 Timestamp raised_at) {
  std::vector<Flag> flags;
  for (const auto& [item, proficiency] : profile.proficiency) {
    auto a = profile.attempts.find(item);
    const int attempts = a == profile.attempts.end() ? 0 : a->second;
    if (attempts >= config.min_attempts && proficiency < config.flag_threshold)
      flags.push_back(Flag{profile.pupil_id, item, proficiency, attempts, 0, raised_at});
  }
  std::sort(flags.begin(), flags.end(), [](const Flag& a, const Flag& b) {
    if (a.proficiency != b.proficiency) return a.proficiency < b.proficiency;
    if (a.attempts != b.attempts) return a.attempts > b.attempts;
    return a.item_id < b.item_id;
  });
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i].priority_rank = static_cast<int>(i + 1);
  return flags;
}

Progression progression_check(const PupilProfile& profile, const ItemBank& bank,
                              const SessionConfig& config) {
  const auto items = bank.band_items(profile.ability_band);
  Progression out{false, profile.ability_band};
  double sum = 0.0;
  for (const auto& item : items) {
    auto a = profile.attempts.find(item.item_id);
    if (a == profile.attempts.end() || a->second < config.progress_min_attempts_per_item)
      return out;
    sum += profile.proficiency.at(item.item_id);
  }
  const double mean = items.empty() ? 0.0 : sum / static_cast<double>(items.size());
  out.ready = !items.empty() && mean >= config.progress_threshold;
  if (out.ready && bank.has_band(profile.ability_band + 1)) out.band = profile.ability_band + 1;
  return out;
}

}  // namespace vocal
