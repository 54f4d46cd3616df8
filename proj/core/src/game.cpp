#include "vocal/game.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vocal/error.hpp"
#include "vocal/rng.hpp"

namespace vocal {

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::PowerUp: return "PowerUp";
    case Phase::Firing: return "Firing";
    case Phase::Over: return "Over";
  }
  return "Over";
}

std::string_view to_string(OverReason reason) noexcept {
  switch (reason) {
    case OverReason::None: return "None";
    case OverReason::Flooded: return "Flooded";
    case OverReason::AllCaptured: return "AllCaptured";
  }
  return "None";
}

std::string_view event_kind(const GameEvent& event) noexcept {
  struct Visitor {
    std::string_view operator()(const PowerGained&) const { return "PowerGained"; }
    std::string_view operator()(const BubbleLaunched&) const { return "BubbleLaunched"; }
    std::string_view operator()(const NativeCaptured&) const { return "NativeCaptured"; }
    std::string_view operator()(const BubbleExpired&) const { return "BubbleExpired"; }
    std::string_view operator()(const FloodAdvanced&) const { return "FloodAdvanced"; }
    std::string_view operator()(const RoundStarted&) const { return "RoundStarted"; }
    std::string_view operator()(const GameOver&) const { return "GameOver"; }
  };
  return std::visit(Visitor{}, event.payload);
}

void GameConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be positive");
  };
  positive(gravity, "gravity");
  positive(island_half_width, "island_half_width");
  positive(launch_height, "launch_height");
  positive(bubble_radius, "bubble_radius");
  positive(native_radius, "native_radius");
  positive(native_speed, "native_speed");
  positive(island_height, "island_height");
  positive(power_per_correct, "power_per_correct");
  positive(max_speed, "max_speed");
  if (!(flood_rate >= 0.0) || !std::isfinite(flood_rate))
    throw Error(ErrorCode::InvalidConfig, "flood_rate must be >= 0");
  if (bubbles_per_powerup < 1) throw Error(ErrorCode::InvalidConfig, "bubbles_per_powerup must be >= 1");
  if (native_count < 1) throw Error(ErrorCode::InvalidConfig, "native_count must be >= 1");
}

std::size_t GameState::captured_count() const noexcept {
  std::size_t n = 0;
  for (const auto& native : natives) n += native.captured ? 1 : 0;
  return n;
}

Position trajectory(double angle_deg, double speed, double t, const GameConfig& config) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  return Position{speed * std::cos(theta) * t,
                  config.launch_height + speed * std::sin(theta) * t -
                      0.5 * config.gravity * t * t};
}

namespace {

void require_phase(const GameState& state, Phase phase, const char* op) {
  if (state.phase != phase)
    throw Error(ErrorCode::WrongPhase, std::string(op) + " requires phase " +
                                           std::string(to_string(phase)) + ", game is in " +
                                           std::string(to_string(state.phase)));
}

void log_event(GameState& state, GameEventPayload payload) {
  state.event_log.push_back(GameEvent{state.tick_index, std::move(payload)});
}

}  // namespace

GameState new_game(const GameConfig& config) {
  config.validate();
  GameState state;
  state.config = config;
  state.remaining_powerup_items = config.bubbles_per_powerup;
  Rng rng(mix_seed(config.seed, 0x6e6174697665ULL));
  state.natives.reserve(static_cast<std::size_t>(config.native_count));
  for (int i = 0; i < config.native_count; ++i) {
    Native native;
    native.x = rng.uniform(-config.island_half_width, config.island_half_width);
    native.velocity = rng.coin() ? config.native_speed : -config.native_speed;
    state.natives.push_back(native);
  }
  return state;
}

GameState apply_reading_outcome(GameState state, bool correct) {
  require_phase(state, Phase::PowerUp, "reading outcome");
  if (state.remaining_powerup_items <= 0)
    throw Error(ErrorCode::WrongPhase, "no power-up items remain in this round");
  if (correct) {
    state.power += state.config.power_per_correct;
    log_event(state, PowerGained{state.config.power_per_correct});
  }
  if (--state.remaining_powerup_items == 0) state.phase = Phase::Firing;
  return state;
}

GameState launch_bubble(GameState state, double angle_deg, double speed) {
  require_phase(state, Phase::Firing, "launch");
  if (!(angle_deg > 0.0 && angle_deg < 180.0))
    throw Error(ErrorCode::OutOfRange, "launch angle must be in (0, 180) degrees");
  if (!(speed > 0.0 && speed <= state.config.max_speed))
    throw Error(ErrorCode::OutOfRange,
                "launch speed must be in (0, " + std::to_string(state.config.max_speed) + "]");
  if (speed > state.power)
    throw Error(ErrorCode::InsufficientPower, "launch speed " + std::to_string(speed) +
                                                  " exceeds available power " +
                                                  std::to_string(state.power));
  state.power -= speed;
  const double theta = angle_deg * std::numbers::pi / 180.0;
  Projectile p;
  p.id = state.next_bubble_id++;
  p.x = 0.0;
  p.y = state.config.launch_height;
  p.vx = speed * std::cos(theta);
  p.vy = speed * std::sin(theta);
  state.projectiles.push_back(p);
  log_event(state, BubbleLaunched{p.id, angle_deg, speed});
  return state;
}

GameState tick(GameState state) {
  require_phase(state, Phase::Firing, "tick");
  const GameConfig& cfg = state.config;
  constexpr double dt = GameConfig::kDt;
  ++state.tick_index;

  // Exact update for constant acceleration; no per-step truncation error.
  for (auto& p : state.projectiles) {
    p.x += p.vx * dt;
    p.y += p.vy * dt - 0.5 * cfg.gravity * dt * dt;
    p.vy -= cfg.gravity * dt;
  }

  for (auto& native : state.natives) {
    if (native.captured) continue;
    native.x += native.velocity * dt;
    if (native.x > cfg.island_half_width) native.velocity = -cfg.native_speed;
    if (native.x < -cfg.island_half_width) native.velocity = cfg.native_speed;
  }

  // Computed from the tick count rather than accumulated so the flood
  // schedule is exact.
  state.flood_level =
      static_cast<double>(state.tick_index) * cfg.flood_rate / GameConfig::kTickRate;

  const double reach = cfg.bubble_radius + cfg.native_radius;
  std::vector<Projectile> in_flight;
  in_flight.reserve(state.projectiles.size());
  for (const auto& p : state.projectiles) {
    std::size_t hit = state.natives.size();
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.natives.size(); ++i) {
      const auto& native = state.natives[i];
      if (native.captured) continue;
      const double dx = p.x - native.x;
      const double d2 = dx * dx + p.y * p.y;
      if (d2 <= reach * reach && d2 < nearest) {
        nearest = d2;
        hit = i;
      }
    }
    if (hit < state.natives.size()) {
      state.natives[hit].captured = true;
      state.score += kPointsPerCapture;
      log_event(state, NativeCaptured{hit, p.id});
    } else if (p.y < state.flood_level) {
      log_event(state, BubbleExpired{p.id});
    } else {
      in_flight.push_back(p);
    }
  }
  state.projectiles = std::move(in_flight);

  if (cfg.flood_rate > 0.0 && state.tick_index % GameConfig::kTickRate == 0)
    log_event(state, FloodAdvanced{state.flood_level});

  if (state.flood_level >= cfg.island_height - 1e-12) {
    state.phase = Phase::Over;
    state.over_reason = OverReason::Flooded;
    log_event(state, GameOver{OverReason::Flooded});
  } else if (state.captured_count() == state.natives.size()) {
    state.phase = Phase::Over;
    state.over_reason = OverReason::AllCaptured;
    log_event(state, GameOver{OverReason::AllCaptured});
  }
  return state;
}

GameState begin_round(GameState state) {
  require_phase(state, Phase::Firing, "begin round");
  if (!state.projectiles.empty())
    throw Error(ErrorCode::WrongPhase, "bubbles are still in flight");
  state.phase = Phase::PowerUp;
  state.remaining_powerup_items = state.config.bubbles_per_powerup;
  ++state.round;
  log_event(state, RoundStarted{state.round});
  return state;
}

GameState run_until_resolved(GameState state) {
  while (state.phase == Phase::Firing && !state.projectiles.empty()) state = tick(std::move(state));
  return state;
}

GameState replay(const GameConfig& config, std::span<const ScriptEntry> script) {
  GameState state = new_game(config);
  for (const auto& entry : script) {
    try {
      if (entry.tick < state.tick_index)
        throw Error(ErrorCode::Validation, "script tick is earlier than the game clock (" +
                                               std::to_string(state.tick_index) + ")");
      while (state.tick_index < entry.tick) state = tick(std::move(state));
      state = std::visit(
          [&state](const auto& cmd) -> GameState {
            using T = std::decay_t<decltype(cmd)>;
            if constexpr (std::is_same_v<T, ReadingCommand>)
              return apply_reading_outcome(std::move(state), cmd.correct);
            else if constexpr (std::is_same_v<T, LaunchCommand>)
              return launch_bubble(std::move(state), cmd.angle_deg, cmd.speed);
            else if constexpr (std::is_same_v<T, BeginRoundCommand>)
              return begin_round(std::move(state));
            else
              return std::move(state);
          },
          entry.command);
    } catch (const Error& e) {
      throw e.with_context("tick " + std::to_string(entry.tick));
    }
  }
  return state;
}

}  // namespace vocal
