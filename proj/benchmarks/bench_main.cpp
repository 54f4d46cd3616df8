#include <benchmark/benchmark.h>

#include <memory>

#include "vocal/game.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/session.hpp"
#include "vocal/simulation.hpp"
#include "vocal/time.hpp"

namespace {

using namespace vocal;

void BM_XcorrScore(benchmark::State& state) {
  const auto a = extract_features(synth_utterance("sh", 1, 0.5));
  const auto b = synth_template("sh").features;
  const auto shift = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(xcorr_score(a, b, shift));
}
BENCHMARK(BM_XcorrScore)->Arg(0)->Arg(10)->Arg(40);

void BM_ExtractFeatures(benchmark::State& state) {
  const AudioClip clip = synth_utterance("ch", 3, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(clip));
}
BENCHMARK(BM_ExtractFeatures);

void BM_Classify(benchmark::State& state) {
  const ItemBank& bank = default_bank();
  TemplateSet all = synth_templates(bank);
  std::vector<std::string> ids;
  for (const auto& item : bank.items()) {
    if (ids.size() == static_cast<std::size_t>(state.range(0))) break;
    ids.push_back(item.item_id);
  }
  const TemplateSet candidates = all.subset(ids);
  const auto utterance = extract_features(synth_utterance(ids.front(), 9, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(classify(utterance, candidates));
}
BENCHMARK(BM_Classify)->Arg(1)->Arg(4)->Arg(8);

void BM_Tick(benchmark::State& state) {
  GameState game = new_game(GameConfig{});
  for (int i = 0; i < game.remaining_powerup_items + 8 && game.phase == Phase::PowerUp; ++i)
    game = apply_reading_outcome(std::move(game), true);
  game = launch_bubble(std::move(game), 60.0, game.power / 2.0);
  game = launch_bubble(std::move(game), 120.0, game.power);
  for (auto _ : state) benchmark::DoNotOptimize(tick(game));
}
BENCHMARK(BM_Tick);

void BM_Session(benchmark::State& state) {
  SimulationSpec spec;
  spec.seed = 11;
  const SimulatedPupil pupil = simulated_pupil(spec, 0);
  SessionContext context;
  context.bank = std::make_shared<const ItemBank>(default_bank());
  context.templates = std::make_shared<const TemplateSet>(synth_templates(*context.bank));
  context.clock = stepping_clock(Timestamp{kSimulationEpochMs}, 1000);
  PupilProfile profile;
  profile.pupil_id = pupil.pupil_id;
  profile.ability_band = context.bank->bands().front();
  int n = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_session(profile, context, pupil.session_inputs(n++)));
}
BENCHMARK(BM_Session)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
