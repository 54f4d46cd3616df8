#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace vocal {

struct GameConfig {
  double gravity = 9.8;
  double island_half_width = 10.0;
  double launch_height = 1.0;
  double bubble_radius = 0.5;
  double native_radius = 0.5;
  double native_speed = 1.0;
  double flood_rate = 0.02;  // units per second
  double island_height = 2.0;
  double power_per_correct = 10.0;
  double max_speed = 30.0;
  int bubbles_per_powerup = 3;
  int native_count = 5;
  std::uint64_t seed = 1;

  static constexpr int kTickRate = 30;
  static constexpr double kDt = 1.0 / kTickRate;

  /// Throws Error{InvalidConfig}. flood_rate may be 0; everything else > 0.
  void validate() const;

  bool operator==(const GameConfig&) const = default;
};

enum class Phase { PowerUp, Firing, Over };
enum class OverReason { None, Flooded, AllCaptured };

std::string_view to_string(Phase phase) noexcept;
std::string_view to_string(OverReason reason) noexcept;

/// Natives walk along the island surface at y = 0.
struct Native {
  double x = 0.0;
  double velocity = 0.0;
  bool captured = false;

  bool operator==(const Native&) const = default;
};

struct Projectile {
  std::uint32_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  bool operator==(const Projectile&) const = default;
};

struct PowerGained {
  double amount = 0.0;
  bool operator==(const PowerGained&) const = default;
};
struct BubbleLaunched {
  std::uint32_t bubble = 0;
  double angle_deg = 0.0;
  double speed = 0.0;
  bool operator==(const BubbleLaunched&) const = default;
};
struct NativeCaptured {
  std::size_t index = 0;
  std::uint32_t bubble = 0;
  bool operator==(const NativeCaptured&) const = default;
};
struct BubbleExpired {
  std::uint32_t bubble = 0;
  bool operator==(const BubbleExpired&) const = default;
};
struct FloodAdvanced {
  double level = 0.0;
  bool operator==(const FloodAdvanced&) const = default;
};
struct RoundStarted {
  int round = 0;
  bool operator==(const RoundStarted&) const = default;
};
struct GameOver {
  OverReason reason = OverReason::None;
  bool operator==(const GameOver&) const = default;
};

using GameEventPayload = std::variant<PowerGained, BubbleLaunched, NativeCaptured, BubbleExpired,
                                      FloodAdvanced, RoundStarted, GameOver>;

struct GameEvent {
  std::int64_t tick = 0;
  GameEventPayload payload;

  bool operator==(const GameEvent&) const = default;
};

std::string_view event_kind(const GameEvent& event) noexcept;

struct GameState {
  GameConfig config;
  Phase phase = Phase::PowerUp;
  OverReason over_reason = OverReason::None;
  double power = 0.0;
  std::int64_t tick_index = 0;
  double flood_level = 0.0;
  int score = 0;
  int round = 1;
  std::vector<Native> natives;
  std::vector<Projectile> projectiles;
  int remaining_powerup_items = 0;
  std::uint32_t next_bubble_id = 1;
  std::vector<GameEvent> event_log;

  bool operator==(const GameState&) const = default;

  std::size_t captured_count() const noexcept;
  /// Firing phase, nothing in flight.
  bool resolved() const noexcept { return phase != Phase::Firing || projectiles.empty(); }
};

inline constexpr int kPointsPerCapture = 100;

/// Closed-form launch kinematics from (0, launch_height).
struct Position {
  double x = 0.0;
  double y = 0.0;
};
Position trajectory(double angle_deg, double speed, double t, const GameConfig& config);

GameState new_game(const GameConfig& config);
/// PowerUp only: credits power for a correct reading; the k-th outcome of the
/// round switches to Firing.
GameState apply_reading_outcome(GameState state, bool correct);
/// Firing only: spends `speed` power on one bubble launched from the volcano.
GameState launch_bubble(GameState state, double angle_deg, double speed);
/// Firing only: one fixed 1/30 s step.
GameState tick(GameState state);
/// Firing -> PowerUp for the next round of k readings. Power, score, natives
/// and flood carry over.
GameState begin_round(GameState state);
/// Steps until nothing is in flight or the game is over.
GameState run_until_resolved(GameState state);

struct ReadingCommand {
  bool correct = false;
  bool operator==(const ReadingCommand&) const = default;
};
struct LaunchCommand {
  double angle_deg = 0.0;
  double speed = 0.0;
  bool operator==(const LaunchCommand&) const = default;
};
struct BeginRoundCommand {
  bool operator==(const BeginRoundCommand&) const = default;
};
/// Only advances the clock to its tick.
struct AdvanceCommand {
  bool operator==(const AdvanceCommand&) const = default;
};

using GameCommand = std::variant<ReadingCommand, LaunchCommand, BeginRoundCommand, AdvanceCommand>;

struct ScriptEntry {
  std::int64_t tick = 0;
  GameCommand command;

  bool operator==(const ScriptEntry&) const = default;
};

/// Replays a command script from new_game(config). Before each entry the game
/// is ticked forward to the entry's tick. Errors carry the offending tick.
GameState replay(const GameConfig& config, std::span<const ScriptEntry> script);

}  // namespace vocal
