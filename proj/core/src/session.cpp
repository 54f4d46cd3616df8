#include "vocal/session.hpp"

#include <algorithm>
#include <set>

#include "vocal/error.hpp"
#include "vocal/rng.hpp"

namespace vocal {

namespace {

constexpr double kSpentPower = 1e-9;

}  // namespace

LiveSession::LiveSession(SessionContext context, PupilProfile profile, std::string session_id,
                         std::string helper_id, std::uint64_t seed)
    : context_(std::move(context)),
      profile_(std::move(profile)),
      session_id_(std::move(session_id)),
      helper_id_(std::move(helper_id)),
      seed_(seed),
      start_band_(profile_.ability_band) {
  if (!context_.bank || context_.bank->empty())
    throw Error(ErrorCode::Validation, "session requires a non-empty item bank");
  if (!context_.templates) throw Error(ErrorCode::Validation, "session requires templates");
  if (!context_.clock) context_.clock = system_clock();
  context_.session.validate();
  if (!context_.bank->has_band(start_band_))
    throw Error(ErrorCode::UnknownBand,
                "pupil band " + std::to_string(start_band_) + " is not in the bank");
  game_ = new_game(context_.game);
  started_at_ = context_.clock();
  start_round();
}

const PhonicsItem* LiveSession::presented() const noexcept {
  if (finished_ || game_.phase != Phase::PowerUp || cursor_ >= on_screen_.size()) return nullptr;
  return &on_screen_[cursor_];
}

bool LiveSession::complete() const noexcept {
  if (finished_ || game_.phase == Phase::Over) return true;
  const auto target = static_cast<std::size_t>(context_.session.items_per_session);
  if (attempts_.size() < target) return false;
  return game_.phase == Phase::PowerUp || firing_done_;
}

void LiveSession::start_round() {
  const auto target = static_cast<std::size_t>(context_.session.items_per_session);
  const std::size_t k = static_cast<std::size_t>(context_.game.bubbles_per_powerup);
  SelectionRequest request;
  request.target_band = start_band_;
  request.count = std::min(k, target - attempts_.size());
  request.seed = mix_seed(seed_, static_cast<std::uint64_t>(game_.round));
  for (const auto& a : attempts_) request.exclude.insert(a.item_id);
  try {
    on_screen_ = select_items(*context_.bank, request);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyBand) throw;
    // Small banks: allow repeats rather than stall the session.
    request.exclude.clear();
    on_screen_ = select_items(*context_.bank, request);
  }
  cursor_ = 0;
}

const Attempt& LiveSession::submit(std::string_view item_id_view, const UtteranceInput& input) {
  const std::string item_id(item_id_view);
  if (finished_) throw Error(ErrorCode::Conflict, "session is finished");
  if (game_.phase != Phase::PowerUp)
    throw Error(ErrorCode::WrongPhase, "attempts are only accepted during power-up");
  const PhonicsItem* current = presented();
  if (!current) throw Error(ErrorCode::Conflict, "no item is awaiting an attempt");
  if (current->item_id != item_id)
    throw Error(ErrorCode::Conflict,
                "item '" + item_id + "' is not the presented item '" + current->item_id + "'");

  if (input.gaze_dwell_ms && *input.gaze_dwell_ms < 0)
    throw Error(ErrorCode::Range, "gaze_dwell_ms must be >= 0");

  Attempt attempt;
  attempt.session_id = session_id_;
  attempt.item_id = item_id;
  attempt.presented_at = context_.clock();
  attempt.gaze_dwell_ms = input.gaze_dwell_ms;

  std::optional<double> loudness;
  if (const auto* clip = std::get_if<AudioClip>(&input.signal)) {
    validate_clip(*clip);
    loudness = loudness_dbfs(*clip);
  }
  if (input.manual_correct) {
    attempt.manual = true;
    attempt.result.best_score = *input.manual_correct ? 1.0 : 0.0;
    if (*input.manual_correct) attempt.result.accepted_item = item_id;
  } else {
    FeatureSequence features;
    if (const auto* clip = std::get_if<AudioClip>(&input.signal)) {
      features = extract_features(*clip);
    } else {
      const auto& given = std::get<FeatureSequence>(input.signal);
      if (given.empty()) throw Error(ErrorCode::Validation, "feature sequence has no frames");
      features = given.normalized() ? given : given.z_normalized();
    }
    std::vector<std::string> ids;
    for (const auto& item : on_screen_) ids.push_back(item.item_id);
    if (std::find(ids.begin(), ids.end(), item_id) == ids.end()) ids.push_back(item_id);
    const TemplateSet candidates = context_.templates->subset(ids);
    attempt.result = classify(features, candidates, context_.session.reject_threshold);
  }
  attempt.result.loudness_dbfs = loudness;
  attempt.correct = is_correct(attempt.result, item_id);
  attempt.confidence = confidence_index(input.gaze_dwell_ms, loudness);

  // Both transitions are computed before either is committed.
  PupilProfile next_profile = record_attempt(profile_, attempt, context_.session);
  GameState next_game = apply_reading_outcome(game_, attempt.correct);
  profile_ = std::move(next_profile);
  game_ = std::move(next_game);
  attempts_.push_back(std::move(attempt));
  ++cursor_;

  // Nothing to fire with: skip straight to the next round.
  if (game_.phase == Phase::Firing && game_.power <= kSpentPower) after_firing_step();
  return attempts_.back();
}

std::vector<GameEvent> LiveSession::launch(double angle_deg, double speed) {
  if (finished_) throw Error(ErrorCode::Conflict, "session is finished");
  if (firing_done_) throw Error(ErrorCode::WrongPhase, "firing phase has ended");
  const std::size_t before = game_.event_log.size();
  game_ = run_until_resolved(launch_bubble(game_, angle_deg, speed));
  if (game_.power <= kSpentPower) after_firing_step();
  return {game_.event_log.begin() + static_cast<std::ptrdiff_t>(before), game_.event_log.end()};
}

void LiveSession::end_firing() {
  if (finished_) throw Error(ErrorCode::Conflict, "session is finished");
  if (game_.phase != Phase::Firing || firing_done_)
    throw Error(ErrorCode::WrongPhase, "no firing phase to end");
  after_firing_step();
}

void LiveSession::after_firing_step() {
  if (game_.phase != Phase::Firing || !game_.projectiles.empty()) return;
  if (attempts_.size() < static_cast<std::size_t>(context_.session.items_per_session)) {
    game_ = begin_round(std::move(game_));
    start_round();
  } else {
    firing_done_ = true;
  }
}

SessionRecord LiveSession::finish() {
  if (finished_) throw Error(ErrorCode::Conflict, "session is already finished");
  if (attempts_.empty()) throw Error(ErrorCode::Conflict, "session has no attempts");
  SessionRecord record;
  record.session_id = session_id_;
  record.pupil_id = profile_.pupil_id;
  record.helper_id = helper_id_;
  record.started_at = started_at_;
  record.ended_at = context_.clock();
  record.ability_band = start_band_;
  record.attempts = attempts_;
  record.game_events = game_.event_log;
  record.final_score = game_.score;
  record.flags_after = generate_flags(profile_, context_.session, record.ended_at);
  record.progression = progression_check(profile_, *context_.bank, context_.session);
  profile_.ability_band = record.progression.band;
  finished_ = true;
  return record;
}

SessionOutcome run_session(const PupilProfile& profile, const SessionContext& context,
                           const SessionInputs& inputs) {
  const std::string where = "session " + inputs.session_id;
  if (!context.bank || context.bank->empty())
    throw Error(ErrorCode::Validation, where + ": item bank is empty");
  if (!inputs.utterance_for) throw Error(ErrorCode::Validation, where + ": no utterance source");

  LiveSession session(context, profile, inputs.session_id, inputs.helper_id, inputs.seed);
  std::size_t launches = 0;
  while (!session.complete()) {
    if (const PhonicsItem* item = session.presented()) {
      const PhonicsItem current = *item;
      const std::size_t position = session.presented_count();
      try {
        session.submit(current.item_id, inputs.utterance_for(current, position));
      } catch (const Error& e) {
        throw e.with_context(where + ", item " + std::to_string(position + 1));
      }
    } else if (session.game().phase == Phase::Firing) {
      auto command = inputs.next_launch ? inputs.next_launch(session.game()) : std::nullopt;
      if (!command) {
        session.end_firing();
        continue;
      }
      ++launches;
      try {
        session.launch(command->angle_deg, command->speed);
      } catch (const Error& e) {
        throw e.with_context(where + ", launch " + std::to_string(launches));
      }
    } else {
      break;
    }
  }
  SessionOutcome outcome;
  outcome.record = session.finish();
  outcome.profile = session.profile();
  outcome.game = session.game();
  return outcome;
}

std::function<std::optional<LaunchCommand>(const GameState&)> launches_per_round(
    std::vector<std::vector<LaunchCommand>> launches) {
  struct Cursor {
    std::vector<std::vector<LaunchCommand>> plan;
    int round = 0;
    std::size_t next = 0;
  };
  auto cursor = std::make_shared<Cursor>(Cursor{std::move(launches), 0, 0});
  return [cursor](const GameState& game) -> std::optional<LaunchCommand> {
    if (game.round != cursor->round) {
      cursor->round = game.round;
      cursor->next = 0;
    }
    const auto r = static_cast<std::size_t>(game.round - 1);
    if (r >= cursor->plan.size() || cursor->next >= cursor->plan[r].size()) return std::nullopt;
    return cursor->plan[r][cursor->next++];
  };
}

PupilProfile profile_from_history(const std::string& pupil_id, int initial_band,
                                  std::span<const SessionRecord> sessions,
                                  const SessionConfig& config) {
  PupilProfile profile;
  profile.pupil_id = pupil_id;
  profile.ability_band = initial_band;
  for (const auto& record : sessions) {
    for (const auto& attempt : record.attempts) profile = record_attempt(std::move(profile), attempt, config);
    profile.ability_band = record.progression.band;
  }
  return profile;
}

TemplateSet synth_templates(const ItemBank& bank) {
  TemplateSet set;
  for (const auto& item : bank.items()) set.insert(synth_template(item.item_id));
  return set;
}

}  // namespace vocal
