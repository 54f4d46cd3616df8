#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vocal/item_bank.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/time.hpp"

namespace vocal {

struct SessionConfig {
  double flag_threshold = 0.5;
  int min_attempts = 3;
  double ema_alpha = 0.3;
  double prior_proficiency = 0.5;
  double progress_threshold = 0.8;
  int progress_min_attempts_per_item = 2;
  int items_per_session = 9;
  double reject_threshold = kDefaultRejectThreshold;

  /// Throws Error{InvalidConfig}.
  void validate() const;

  bool operator==(const SessionConfig&) const = default;
};

struct ConfidenceSample {
  Timestamp at;
  double value = 0.0;

  bool operator==(const ConfidenceSample&) const = default;
};

struct PupilProfile {
  std::string pupil_id;
  int ability_band = 1;
  std::map<std::string, double> proficiency;
  std::map<std::string, int> attempts;
  std::vector<ConfidenceSample> confidence_history;

  bool operator==(const PupilProfile&) const = default;
};

struct Attempt {
  std::string session_id;
  std::string item_id;
  Timestamp presented_at;
  RecognitionResult result;
  bool correct = false;
  std::optional<int> gaze_dwell_ms;
  std::optional<double> confidence;
  /// Verdict entered by the helper instead of the recognizer.
  bool manual = false;

  bool operator==(const Attempt&) const = default;
};

/// Only an acceptance of exactly the presented item counts as correct.
bool is_correct(const RecognitionResult& result, const std::string& presented_item);

struct Flag {
  std::string pupil_id;
  std::string item_id;
  double proficiency = 0.0;
  int attempts = 0;
  int priority_rank = 1;
  Timestamp raised_at;

  bool operator==(const Flag&) const = default;
};

/// Exponential moving average step: (1 - alpha) * prior + alpha * [correct].
/// Throws Error{Range} for prior outside [0, 1] or alpha outside (0, 1).
double update_proficiency(double prior, bool correct, double alpha);

/// Combines loudness and gaze dwell into [0, 1]:
///   loud = clamp01((dbfs + 60) / 40), dwell = clamp01(ms / 5000),
///   both -> 0.5 * loud + 0.5 * (1 - dwell); one -> that term; none -> nullopt.
/// Throws Error{Range} for negative dwell or positive loudness.
std::optional<double> confidence_index(std::optional<int> gaze_dwell_ms,
                                       std::optional<double> loudness_dbfs);

PupilProfile record_attempt(PupilProfile profile, const Attempt& attempt,
                            const SessionConfig& config);

/// Items with enough evidence and low proficiency, most urgent first:
/// ascending proficiency, then descending attempts, then item id.
std::vector<Flag> generate_flags(const PupilProfile& profile, const SessionConfig& config,
                                 Timestamp raised_at);

struct Progression {
  bool ready = false;
  int band = 1;

  bool operator==(const Progression&) const = default;
};

/// Throws Error{UnknownBand} if the pupil's band is not in the bank.
Progression progression_check(const PupilProfile& profile, const ItemBank& bank,
                              const SessionConfig& config);

}  // namespace vocal
