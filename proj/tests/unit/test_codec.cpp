#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vocal/codec.hpp"
#include "vocal/records.hpp"

using namespace vocal;

namespace {

template <typename T>
T round_trip(const T& value) {
  return decode<T>(parse_json(Json(value).dump()));
}

}  // namespace

TEST_CASE("timestamps") {
  const Timestamp t{1'339'891'200'123};
  CHECK(format_timestamp(t) == "2012-06-17T00:00:00.123Z");
  CHECK(parse_timestamp("2012-06-17T00:00:00.123Z") == t);
  CHECK(parse_timestamp("2012-06-17") == Timestamp{1'339'891'200'000});
  CHECK(parse_timestamp("1339891200123") == t);
  CHECK_FALSE(parse_timestamp("yesterday"));
  CHECK(round_trip(t) == t);
  Timestamp before_epoch{-86'400'000 - 5};
  CHECK(parse_timestamp(format_timestamp(before_epoch)) == before_epoch);
}

TEST_CASE("domain values round trip") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 60; ++i) {
    const NewEvent e = fixture::random_event(rng, {"p1"});
    std::visit([](const auto& body) { CHECK(round_trip(body) == body); }, e.body);
  }
  CHECK(round_trip(GameConfig{}) == GameConfig{});
  SessionConfig sc;
  sc.ema_alpha = 0.25;
  CHECK(round_trip(sc) == sc);
  CHECK(round_trip(PhonicsItem{"sh", "sh", ItemKind::Phoneme, 2}) == PhonicsItem{"sh", "sh", ItemKind::Phoneme, 2});

  PupilProfile p;
  p.pupil_id = "p1";
  p.ability_band = 2;
  p.proficiency = {{"a", 0.25}, {"b", 0.75}};
  p.attempts = {{"a", 3}, {"b", 1}};
  p.confidence_history = {{Timestamp{5}, 0.5}};
  CHECK(round_trip(p) == p);

  const auto f = oracle::random_sequence(rng, 7);
  CHECK(round_trip(f) == f);
}

TEST_CASE("strict decoding") {
  CHECK_THROWS_AS(decode<Flag>(parse_json(R"({"pupil_id":"p"})")), Error);
  Json flag = Flag{"p", "a", 0.1, 3, 1, Timestamp{0}};
  flag["extra"] = 1;
  CHECK_THROWS_AS(decode<Flag>(flag), Error);
  CHECK_THROWS_AS(parse_json("{"), Error);
  CHECK_THROWS_AS(decode<GameConfig>(parse_json(R"({"gravity":"high"})")), Error);
}

TEST_CASE("jsonl helpers") {
  const std::vector<ScriptEntry> script{{0, ReadingCommand{true}}, {2, LaunchCommand{45.0, 3.5}},
                                        {9, BeginRoundCommand{}}, {12, AdvanceCommand{}}};
  CHECK(script_from_jsonl(script_to_jsonl(script)) == script);

  const auto state = replay(GameConfig{}, std::vector<ScriptEntry>{
                                              {0, ReadingCommand{true}}, {0, ReadingCommand{true}},
                                              {0, ReadingCommand{true}}, {0, LaunchCommand{80.0, 12.0}},
                                              {90, AdvanceCommand{}}});
  CHECK(events_from_jsonl(events_to_jsonl(state.event_log)) == state.event_log);

  TemplateSet set;
  set.insert(synth_template("a"));
  set.insert(synth_template("cat"));
  const auto back = templates_from_jsonl(templates_to_jsonl(set));
  REQUIRE(back.size() == 2);
  CHECK(back.find("cat")->features == set.find("cat")->features);
}

TEST_CASE("record events serialise with their kind") {
  const RecordEvent e{7, "p1", Timestamp{10}, "teacher", Flag{"p1", "a", 0.2, 4, 1, Timestamp{10}}};
  const Json j = e;
  CHECK(j["event_id"] == 7);
  CHECK(j["kind"] == "FlagRaised");
  CHECK(j["body"]["item_id"] == "a");
}
