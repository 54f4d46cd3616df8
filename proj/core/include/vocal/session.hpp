#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vocal/assessment.hpp"
#include "vocal/game.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/time.hpp"

namespace vocal {

/// Everything persisted about one completed reading session.
struct SessionRecord {
  std::string session_id;
  std::string pupil_id;
  std::string helper_id;
  Timestamp started_at;
  Timestamp ended_at;
  int ability_band = 1;
  std::vector<Attempt> attempts;
  std::vector<GameEvent> game_events;
  int final_score = 0;
  std::vector<Flag> flags_after;
  Progression progression;

  bool operator==(const SessionRecord&) const = default;
};

/// Shared, immutable resources a session runs against.
struct SessionContext {
  std::shared_ptr<const ItemBank> bank;
  std::shared_ptr<const TemplateSet> templates;
  GameConfig game;
  SessionConfig session;
  Clock clock;
};

/// One utterance for the presented item: raw audio or pre-extracted features.
struct UtteranceInput {
  std::variant<AudioClip, FeatureSequence> signal;
  std::optional<int> gaze_dwell_ms;
  /// Helper override: stored as the verdict, the signal is not classified.
  std::optional<bool> manual_correct;
};

/// Step-wise reading session: power-up rounds of on-screen items alternate
/// with firing phases until items_per_session items have been read.
///
/// Each utterance is classified against the items currently on screen. A
/// firing phase ends when power is spent or end_firing() is called.
class LiveSession {
 public:
  LiveSession(SessionContext context, PupilProfile profile, std::string session_id,
              std::string helper_id, std::uint64_t seed);

  const std::string& session_id() const noexcept { return session_id_; }
  const std::string& helper_id() const noexcept { return helper_id_; }
  const PupilProfile& profile() const noexcept { return profile_; }
  const GameState& game() const noexcept { return game_; }
  const std::vector<PhonicsItem>& on_screen() const noexcept { return on_screen_; }
  /// Item awaiting an attempt, or nullptr outside a power-up round.
  const PhonicsItem* presented() const noexcept;
  std::size_t presented_count() const noexcept { return attempts_.size(); }
  const std::vector<Attempt>& attempts() const noexcept { return attempts_; }
  /// No further attempts or launches are possible.
  bool complete() const noexcept;

  /// Throws Error{WrongPhase} outside power-up and Error{Conflict} when
  /// item_id is not the presented item.
  const Attempt& submit(std::string_view item_id, const UtteranceInput& input);

  /// Launches one bubble and simulates it to resolution; returns the game
  /// events produced, including any round transition.
  std::vector<GameEvent> launch(double angle_deg, double speed);

  /// Ends the current firing phase even if power remains.
  void end_firing();

  /// Seals the session: recomputes flags and progression, moves the pupil's
  /// band on readiness. Throws Error{Conflict} if nothing was attempted.
  SessionRecord finish();

 private:
  void start_round();
  void after_firing_step();

  SessionContext context_;
  PupilProfile profile_;
  std::string session_id_;
  std::string helper_id_;
  std::uint64_t seed_;
  int start_band_;
  Timestamp started_at_;
  GameState game_;
  std::vector<PhonicsItem> on_screen_;
  std::size_t cursor_ = 0;
  std::vector<Attempt> attempts_;
  bool firing_done_ = false;
  bool finished_ = false;
};

struct SessionInputs {
  std::string session_id = "session";
  std::string helper_id = "helper";
  std::uint64_t seed = 0;
  /// Utterance for the item presented at zero-based position `position`.
  std::function<UtteranceInput(const PhonicsItem& item, std::size_t position)> utterance_for;
  /// Next launch for the current firing phase; nullopt ends the phase.
  std::function<std::optional<LaunchCommand>(const GameState&)> next_launch;
};

struct SessionOutcome {
  SessionRecord record;
  PupilProfile profile;
  GameState game;
};

/// Runs a whole session from scripted inputs. Errors are annotated with the
/// item position or launch number they occurred at.
SessionOutcome run_session(const PupilProfile& profile, const SessionContext& context,
                           const SessionInputs& inputs);

/// Launch plan that plays launches[r] during round r+1; a round without an
/// entry fires nothing.
std::function<std::optional<LaunchCommand>(const GameState&)> launches_per_round(
    std::vector<std::vector<LaunchCommand>> launches);

/// Rebuilds a profile by replaying completed sessions in order.
PupilProfile profile_from_history(const std::string& pupil_id, int initial_band,
                                  std::span<const SessionRecord> sessions,
                                  const SessionConfig& config);

/// Templates synthesised from every item of a bank.
TemplateSet synth_templates(const ItemBank& bank);

}  // namespace vocal
