#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocal/assessment.hpp"
#include "vocal/game.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/session.hpp"

namespace vocal {

/// Simulated time starts at 2026-01-05T09:00:00Z.
inline constexpr std::int64_t kSimulationEpochMs = 1767603600000;

struct SimulationSpec {
  int pupil_count = 30;
  int items_per_session = 9;
  int sessions_per_pupil = 6;
  std::uint64_t seed = 1;
  /// Event log to write; a scratch file is used (and removed) when unset.
  std::optional<std::filesystem::path> store_path;
  GameConfig game;
  SessionConfig session;

  /// Throws Error{Validation}.
  void validate() const;
};

/// Synthetic noise level for a pupil of the given skill in [0, 1].
double noise_for_skill(double skill);

struct PupilSummary {
  std::string pupil_id;
  double skill = 0.0;
  double noise_sigma = 0.0;
  int start_band = 1;
  int end_band = 1;
  int attempts = 0;
  int correct = 0;
  int total_score = 0;
  double mean_proficiency = 0.0;
  std::vector<Flag> flags;
  Progression progression;
};

struct ClassReport {
  std::uint64_t seed = 0;
  int sessions_per_pupil = 0;
  int items_per_session = 0;
  std::vector<PupilSummary> pupils;  // sorted by pupil_id

  /// Mean flag count over pupils with skill < 0.5 (low) and >= 0.5 (high).
  double low_skill_mean_flags() const;
  double high_skill_mean_flags() const;
};

/// Deterministic behaviour of one simulated pupil.
struct SimulatedPupil {
  std::string pupil_id;
  std::uint64_t seed = 0;
  double skill = 0.0;
  double noise_sigma = 0.0;

  /// Utterances and launches for the pupil's session number `index`.
  SessionInputs session_inputs(int index) const;
};

/// Pupil `index` (0-based) of a simulated class.
SimulatedPupil simulated_pupil(const SimulationSpec& spec, int index);

/// Summary of a pupil rebuilt from its logged sessions.
PupilSummary summarize_pupil(const SimulatedPupil& pupil, int start_band,
                             std::span<const SessionRecord> history, const SessionConfig& config);

/// Runs every pupil's sessions in-process through assessment, game and
/// records. Deterministic for a given spec.
ClassReport run_simulation(const SimulationSpec& spec, const ItemBank& bank);

/// Plain-text report with a stable section order.
std::string format_report(const ClassReport& report);

}  // namespace vocal
