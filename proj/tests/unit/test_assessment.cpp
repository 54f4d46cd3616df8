#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vocal/assessment.hpp"
#include "vocal/error.hpp"

using namespace vocal;

namespace {

Attempt attempt_on(const std::string& item, bool correct) {
  Attempt a;
  a.session_id = "s";
  a.item_id = item;
  if (correct) a.result.accepted_item = item;
  a.result.best_score = correct ? 0.9 : 0.1;
  a.correct = correct;
  return a;
}

PupilProfile profile_of(std::initializer_list<std::tuple<const char*, double, int>> rows) {
  PupilProfile p;
  p.pupil_id = "p1";
  for (const auto& [id, prof, n] : rows) {
    p.proficiency[id] = prof;
    p.attempts[id] = n;
  }
  return p;
}

std::vector<std::string> ids(const std::vector<Flag>& flags) {
  std::vector<std::string> out;
  for (const auto& f : flags) out.push_back(f.item_id);
  return out;
}

}  // namespace

TEST_CASE("update_proficiency") {
  CHECK(update_proficiency(0.0, false, 0.3) == 0.0);
  CHECK(update_proficiency(1.0, true, 0.3) == 1.0);
  CHECK(update_proficiency(0.5, true, 0.3) == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(update_proficiency(0.65, false, 0.3) == doctest::Approx(0.455).epsilon(1e-12));
  CHECK_THROWS_AS(update_proficiency(1.5, true, 0.3), Error);
  CHECK_THROWS_AS(update_proficiency(0.5, true, 0.0), Error);
  CHECK_THROWS_AS(update_proficiency(0.5, true, 1.0), Error);
}

TEST_CASE("update direction and closed form") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double prior = u(rng);
    const double alpha = 0.01 + 0.98 * u(rng);
    CHECK(update_proficiency(prior, true, alpha) >= prior);
    CHECK(update_proficiency(prior, false, alpha) <= prior);
    bool seq[7];
    double p = prior;
    for (bool& b : seq) {
      b = rng() % 2;
      p = update_proficiency(p, b, alpha);
    }
    CHECK(std::abs(p - oracle::ema_closed_form(prior, seq, alpha)) < 1e-12);
  }
}

TEST_CASE("confidence_index") {
  CHECK(*confidence_index(0, -20.0) == 1.0);
  CHECK(*confidence_index(5000, -60.0) == 0.0);
  CHECK(*confidence_index(2500, std::nullopt) == 0.5);
  CHECK(*confidence_index(std::nullopt, -40.0) == 0.5);
  CHECK_FALSE(confidence_index(std::nullopt, std::nullopt).has_value());
  CHECK_THROWS_AS(confidence_index(-1, std::nullopt), Error);
  CHECK_THROWS_AS(confidence_index(std::nullopt, 1.0), Error);
  double last = 2.0;
  for (int dwell = 0; dwell <= 6000; dwell += 250) {
    const double c = *confidence_index(dwell, -30.0);
    CHECK(c <= last);
    last = c;
  }
  last = -1.0;
  for (double db = -96.0; db <= 0.0; db += 4.0) {
    const double c = *confidence_index(1000, db);
    CHECK(c >= last);
    last = c;
  }
}

TEST_CASE("record_attempt") {
  const SessionConfig config;
  PupilProfile p;
  p.pupil_id = "p1";
  p.proficiency["a"] = 0.3;
  p.attempts["a"] = 2;
  p = record_attempt(std::move(p), attempt_on("sh", true), config);
  CHECK(p.proficiency["sh"] == doctest::Approx(0.65));
  CHECK(p.attempts["sh"] == 1);
  CHECK(p.proficiency["a"] == 0.3);
  CHECK(p.attempts["a"] == 2);
  p = record_attempt(std::move(p), attempt_on("sh", false), config);
  CHECK(p.proficiency["sh"] == doctest::Approx(0.455));

  auto with_conf = attempt_on("t", true);
  with_conf.confidence = 0.7;
  with_conf.presented_at = Timestamp{123};
  p = record_attempt(std::move(p), with_conf, config);
  REQUIRE(p.confidence_history.size() == 1);
  CHECK(p.confidence_history[0] == ConfidenceSample{Timestamp{123}, 0.7});

  auto inconsistent = attempt_on("t", true);
  inconsistent.correct = false;
  CHECK_THROWS_AS(record_attempt(p, inconsistent, config), Error);
}

TEST_CASE("generate_flags") {
  const SessionConfig config;
  CHECK(generate_flags(PupilProfile{}, config, Timestamp{}).empty());

  const auto p = profile_of({{"a", 0.2, 4}, {"s", 0.4, 3}, {"t", 0.9, 5}});
  const auto flags = generate_flags(p, config, Timestamp{9});
  CHECK(ids(flags) == std::vector<std::string>{"a", "s"});
  CHECK(flags[0].priority_rank == 1);
  CHECK(flags[1].priority_rank == 2);
  CHECK(flags[0].raised_at == Timestamp{9});
  CHECK(generate_flags(p, config, Timestamp{9}) == flags);

  CHECK(generate_flags(profile_of({{"x", 0.1, 2}}), config, Timestamp{}).empty());

  const auto ties = profile_of({{"b", 0.3, 3}, {"a", 0.3, 3}, {"c", 0.3, 6}});
  CHECK(ids(generate_flags(ties, config, Timestamp{})) == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("generate_flags agrees with the pairwise oracle") {
  std::mt19937_64 rng(21);
  const SessionConfig config;
  for (int trial = 0; trial < 100; ++trial) {
    PupilProfile p;
    p.pupil_id = "p";
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const std::string id = "i" + std::to_string(rng() % 20);
      p.proficiency[id] = static_cast<double>(rng() % 6) / 10.0;
      p.attempts[id] = static_cast<int>(rng() % 6);
    }
    CHECK(generate_flags(p, config, Timestamp{}) == oracle::flags(p, config, Timestamp{}));
  }
}

TEST_CASE("progression_check") {
  const auto bank = fixture::small_bank();
  const SessionConfig config;
  auto p = profile_of({{"a", 1.0, 2}, {"s", 1.0, 2}, {"t", 1.0, 2}});
  CHECK(progression_check(p, bank, config) == Progression{true, 2});

  auto missing = profile_of({{"a", 1.0, 2}, {"s", 1.0, 2}});
  CHECK_FALSE(progression_check(missing, bank, config).ready);

  auto thin = profile_of({{"a", 1.0, 2}, {"s", 1.0, 2}, {"t", 1.0, 1}});
  CHECK_FALSE(progression_check(thin, bank, config).ready);

  auto boundary = profile_of({{"a", 0.79, 2}, {"s", 0.79, 3}, {"t", 0.79, 4}});
  CHECK(progression_check(boundary, bank, config) == Progression{false, 1});

  auto top = profile_of({{"cat", 1.0, 3}});
  top.ability_band = 3;
  CHECK(progression_check(top, bank, config) == Progression{true, 3});

  p.ability_band = 7;
  try {
    progression_check(p, bank, config);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownBand);
  }
}

TEST_CASE("session config validation") {
  SessionConfig c;
  CHECK_NOTHROW(c.validate());
  c.ema_alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SessionConfig{};
  c.min_attempts = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
