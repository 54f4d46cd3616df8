#include "vocal/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <sstream>

#include <unistd.h>

#include "vocal/error.hpp"
#include "vocal/records.hpp"
#include "vocal/rng.hpp"
#include "vocal/session.hpp"

namespace vocal {

namespace {

constexpr double kMaxNoise = 2.0;
constexpr std::int64_t kDayMs = 86'400'000;

std::string pupil_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pupil-%02d", index + 1);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Two launches per firing phase: half the power, then the rest.
std::function<std::optional<LaunchCommand>(const GameState&)> launch_policy(std::uint64_t seed) {
  struct State {
    Rng rng;
    int round = 0;
    int fired = 0;
  };
  auto st = std::make_shared<State>(State{Rng(seed), 0, 0});
  return [st](const GameState& game) -> std::optional<LaunchCommand> {
    if (game.round != st->round) {
      st->round = game.round;
      st->fired = 0;
    }
    if (game.power < 0.5) return std::nullopt;
    double speed = game.power;
    if (st->fired == 0 && game.power >= 2.0) speed = game.power / 2.0;
    speed = std::min(speed, game.config.max_speed);
    ++st->fired;
    return LaunchCommand{st->rng.uniform(20.0, 160.0), speed};
  };
}

class ScratchFile {
 public:
  explicit ScratchFile(std::filesystem::path path) : path_(std::move(path)) {}
  ~ScratchFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

void SimulationSpec::validate() const {
  if (pupil_count < 1) throw Error(ErrorCode::Validation, "pupil count must be >= 1");
  if (items_per_session < 1) throw Error(ErrorCode::Validation, "items per session must be >= 1");
  if (sessions_per_pupil < 1) throw Error(ErrorCode::Validation, "sessions per pupil must be >= 1");
  game.validate();
  session.validate();
}

double noise_for_skill(double skill) { return kMaxNoise * (1.0 - std::clamp(skill, 0.0, 1.0)); }

double ClassReport::low_skill_mean_flags() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : pupils)
    if (p.skill < 0.5) {
      sum += static_cast<double>(p.flags.size());
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

double ClassReport::high_skill_mean_flags() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : pupils)
    if (p.skill >= 0.5) {
      sum += static_cast<double>(p.flags.size());
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

SimulatedPupil simulated_pupil(const SimulationSpec& spec, int index) {
  SimulatedPupil pupil;
  pupil.pupil_id = pupil_name(index);
  pupil.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(index) + 1);
  Rng rng(pupil.seed);
  pupil.skill = rng.uniform01();
  pupil.noise_sigma = noise_for_skill(pupil.skill);
  return pupil;
}

SessionInputs SimulatedPupil::session_inputs(int index) const {
  const std::uint64_t session_seed = mix_seed(seed, static_cast<std::uint64_t>(index) + 1);
  auto dwell_rng = std::make_shared<Rng>(mix_seed(session_seed, 0x64776c6cULL));
  SessionInputs inputs;
  inputs.session_id = pupil_id + "-s" + std::to_string(index + 1);
  inputs.helper_id = "sim-helper";
  inputs.seed = session_seed;
  const double noise = noise_sigma;
  const double sk = skill;
  inputs.utterance_for = [session_seed, noise, sk, dwell_rng](const PhonicsItem& item,
                                                              std::size_t position) {
    UtteranceInput u;
    u.signal = synth_utterance(item.item_id, mix_seed(session_seed, position + 1), noise);
    u.gaze_dwell_ms = static_cast<int>(500.0 + 4000.0 * (1.0 - sk) * dwell_rng->uniform01());
    return u;
  };
  inputs.next_launch = launch_policy(mix_seed(session_seed, 0x6c61756eULL));
  return inputs;
}

PupilSummary summarize_pupil(const SimulatedPupil& pupil, int start_band,
                             std::span<const SessionRecord> history, const SessionConfig& config) {
  PupilSummary summary;
  summary.pupil_id = pupil.pupil_id;
  summary.skill = pupil.skill;
  summary.noise_sigma = pupil.noise_sigma;
  summary.start_band = start_band;
  const PupilProfile derived = profile_from_history(pupil.pupil_id, start_band, history, config);
  for (const auto& record : history) {
    for (const auto& a : record.attempts) {
      ++summary.attempts;
      summary.correct += a.correct ? 1 : 0;
    }
    summary.total_score += record.final_score;
  }
  double sum = 0.0;
  for (const auto& [_, v] : derived.proficiency) sum += v;
  summary.mean_proficiency =
      derived.proficiency.empty() ? 0.0 : sum / static_cast<double>(derived.proficiency.size());
  summary.end_band = derived.ability_band;
  const Timestamp last = history.empty() ? Timestamp{} : history.back().ended_at;
  summary.flags = generate_flags(derived, config, last);
  summary.progression =
      history.empty() ? Progression{false, derived.ability_band} : history.back().progression;
  return summary;
}

ClassReport run_simulation(const SimulationSpec& spec, const ItemBank& bank) {
  spec.validate();
  if (bank.empty()) throw Error(ErrorCode::Validation, "simulation needs a non-empty bank");

  std::optional<ScratchFile> scratch;
  std::filesystem::path store_path;
  if (spec.store_path) {
    store_path = *spec.store_path;
  } else {
    scratch.emplace(std::filesystem::temp_directory_path() /
                    ("vocal-sim-" + std::to_string(::getpid()) + "-" +
                     std::to_string(system_now().ms) + ".log"));
    store_path = scratch->path();
  }
  RecordStore store(store_path);

  SessionContext context;
  context.bank = std::make_shared<const ItemBank>(bank);
  context.templates = std::make_shared<const TemplateSet>(synth_templates(bank));
  context.game = spec.game;
  context.session = spec.session;
  context.session.items_per_session = spec.items_per_session;

  ClassReport report;
  report.seed = spec.seed;
  report.sessions_per_pupil = spec.sessions_per_pupil;
  report.items_per_session = spec.items_per_session;

  for (int p = 0; p < spec.pupil_count; ++p) {
    const SimulatedPupil pupil = simulated_pupil(spec, p);
    const int start_band = bank.bands().front();
    PupilProfile profile;
    profile.pupil_id = pupil.pupil_id;
    profile.ability_band = start_band;
    context.clock = stepping_clock(Timestamp{kSimulationEpochMs + p * kDayMs}, 1000);

    try {
      for (int s = 0; s < spec.sessions_per_pupil; ++s) {
        const SessionInputs inputs = pupil.session_inputs(s);
        auto outcome = run_session(profile, context, inputs);
        profile = outcome.profile;

        std::vector<NewEvent> batch;
        const Timestamp at = outcome.record.ended_at;
        batch.push_back(NewEvent{pupil.pupil_id, at, inputs.helper_id, outcome.record});
        for (const auto& flag : outcome.record.flags_after)
          batch.push_back(NewEvent{pupil.pupil_id, at, inputs.helper_id, flag});
        store.append_batch(std::move(batch));
      }
    } catch (const Error& e) {
      throw e.with_context("pupil " + std::to_string(p + 1));
    }

    // The summary is rebuilt from the log rather than the in-memory profile.
    const auto history = session_history(store, pupil.pupil_id);
    report.pupils.push_back(summarize_pupil(pupil, start_band, history, context.session));
  }
  std::sort(report.pupils.begin(), report.pupils.end(),
            [](const PupilSummary& a, const PupilSummary& b) { return a.pupil_id < b.pupil_id; });
  return report;
}

std::string format_report(const ClassReport& report) {
  std::ostringstream out;
  out << "== class report ==\n";
  out << "seed: " << report.seed << "\n";
  out << "pupils: " << report.pupils.size() << "\n";
  out << "sessions per pupil: " << report.sessions_per_pupil << "\n";
  out << "items per session: " << report.items_per_session << "\n\n";

  out << "== pupils ==\n";
  for (const auto& p : report.pupils) {
    out << "-- " << p.pupil_id << "\n";
    out << "skill: " << fixed(p.skill, 3) << "  noise_sigma: " << fixed(p.noise_sigma, 3) << "\n";
    out << "band: " << p.start_band << " -> " << p.end_band << "\n";
    out << "attempts: " << p.attempts << "  correct: " << p.correct << "  accuracy: "
        << fixed(p.attempts ? static_cast<double>(p.correct) / p.attempts : 0.0, 3) << "\n";
    out << "mean proficiency: " << fixed(p.mean_proficiency, 3) << "\n";
    out << "total score: " << p.total_score << "\n";
    out << "progression: " << (p.progression.ready ? "ready" : "not ready") << " (band "
        << p.progression.band << ")\n";
    out << "flags: " << p.flags.size() << "\n";
    for (const auto& f : p.flags)
      out << "  " << f.priority_rank << ". " << f.item_id << "  proficiency "
          << fixed(f.proficiency, 3) << "  attempts " << f.attempts << "\n";
  }

  int low = 0;
  int high = 0;
  for (const auto& p : report.pupils) (p.skill < 0.5 ? low : high) += 1;
  out << "\n== cohorts ==\n";
  out << "low skill (< 0.5): " << low << " pupils, mean flags "
      << fixed(report.low_skill_mean_flags(), 3) << "\n";
  out << "high skill (>= 0.5): " << high << " pupils, mean flags "
      << fixed(report.high_skill_mean_flags(), 3) << "\n";
  return out.str();
}

}  // namespace vocal
