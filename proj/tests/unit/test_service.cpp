#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "fixtures.hpp"
#include "vocal/error.hpp"
#include "vocal/rng.hpp"
#include "vocal/service.hpp"

using namespace vocal;
using fixture::api_request;

namespace {

struct Harness {
  fixture::TempDir dir;
  Service service;

  Harness() : service(fixture::service_config(dir / "records.log"), stepping_clock(Timestamp{1'800'000'000'000}, 1000)) {}

  HttpResponse call(const std::string& method, const std::string& path, const std::string& token,
                    const Json& body = nullptr) {
    return service.handle(api_request(method, path, token, body));
  }

  Json ok(const std::string& method, const std::string& path, const std::string& token,
          const Json& body = nullptr, int status = 200) {
    const auto r = call(method, path, token, body);
    INFO(method << " " << path << " -> " << r.body);
    REQUIRE(r.status == status);
    return Json::parse(r.body);
  }

  std::string start(const std::string& pupil, const std::string& token = "helper") {
    return ok("POST", "/api/v1/sessions", token, {{"pupil_id", pupil}}, 201)["session_id"];
  }
};

std::string wav_b64(const std::string& item, std::uint64_t seed, double sigma) {
  const auto bytes = encode_wav(synth_utterance(item, seed, sigma));
  return base64_encode(std::string(bytes.begin(), bytes.end()));
}

Json manual_attempt(const std::string& item, bool correct) {
  return {{"item_id", item}, {"audio", wav_b64(item, 1, 0.0)}, {"manual", correct}};
}

std::string code_of(const HttpResponse& r) { return Json::parse(r.body)["code"]; }

}  // namespace

TEST_CASE("health and unknown routes") {
  Harness h;
  CHECK(h.call("GET", "/healthz", "").status == 200);
  CHECK(h.call("GET", "/api/v1/nothing", "teacher").status == 404);
  CHECK(h.call("DELETE", "/api/v1/sessions", "teacher").status == 404);
  CHECK(h.call("GET", "/other", "teacher").status == 404);
}

TEST_CASE("session creation") {
  Harness h;
  const Json created = h.ok("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p1"}}, 201);
  CHECK(created["phase"] == "PowerUp");
  REQUIRE(created["items"].size() == 3);
  for (const auto& item : created["items"]) CHECK(item["band"] == 1);
  CHECK(created["presented_item"] == created["items"][0]);

  CHECK(h.call("POST", "/api/v1/sessions", "parent", {{"pupil_id", "p2"}}).status == 403);
  CHECK(h.call("POST", "/api/v1/sessions", "helper", {{"pupil_id", "zz"}}).status == 404);
  CHECK(h.call("POST", "/api/v1/sessions", "", {{"pupil_id", "p2"}}).status == 401);
  CHECK(h.call("POST", "/api/v1/sessions", "bogus", {{"pupil_id", "p2"}}).status == 401);
  const auto dup = h.call("POST", "/api/v1/sessions", "teacher", {{"pupil_id", "p1"}});
  CHECK(dup.status == 409);
  CHECK(h.call("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p2"}, {"mood", 1}}).status == 422);

  HttpRequest bad_json = api_request("POST", "/api/v1/sessions", "helper");
  bad_json.body = "{nope";
  CHECK(h.service.handle(bad_json).status == 400);

  // Token carried in the body.
  const auto via_body = h.call("POST", "/api/v1/sessions", "", {{"pupil_id", "p2"}, {"helper_token", "helper"}});
  CHECK(via_body.status == 201);
}

TEST_CASE("attempts") {
  Harness h;
  const std::string id = h.start("p1");
  const std::string base = "/api/v1/sessions/" + id;
  CHECK(h.call("POST", base + "/attempts", "helper", manual_attempt("zzz", true)).status == 409);
  CHECK(h.call("POST", base + "/attempts", "helper", Json{{"item_id", "zzz"}}).status == 422);
  CHECK(h.ok("GET", "/api/v1/pupils/p1/profile", "helper")["attempts"].empty());
  std::string current;

  // Walk through one power-up round with clean and noisy audio.
  Harness h2;
  const Json created = h2.ok("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p2"}}, 201);
  const std::string b2 = "/api/v1/sessions/" + created["session_id"].get<std::string>();
  current = created["presented_item"]["item_id"];

  Json r = h2.ok("POST", b2 + "/attempts", "helper",
                 {{"item_id", current}, {"audio", wav_b64(current, 3, 0.0)}, {"gaze_dwell_ms", 1200}});
  CHECK(r["correct"] == true);
  CHECK(r["power"] == 10.0);
  CHECK(r["recognition"]["decision"] == "accepted");
  CHECK(r["recognition"]["item_id"] == current);
  CHECK(r["confidence"].is_number());
  CHECK(r["phase"] == "PowerUp");
  current = r["next_item"]["item_id"];

  // Pure noise clip.
  std::vector<std::int16_t> noise(8000);
  std::uint64_t s = 99;
  for (auto& v : noise) v = static_cast<std::int16_t>(static_cast<int>(splitmix64(s) % 8001) - 4000);
  const auto noise_wav = encode_wav(AudioClip{noise});
  r = h2.ok("POST", b2 + "/attempts", "helper",
            {{"item_id", current}, {"audio", base64_encode(std::string(noise_wav.begin(), noise_wav.end()))}});
  CHECK(r["correct"] == false);
  CHECK(r["power"] == 10.0);
  current = r["next_item"]["item_id"];

  // Malformed audio and unknown fields.
  CHECK(h2.call("POST", b2 + "/attempts", "helper", {{"item_id", current}, {"audio", base64_encode("RIFFjunk")}}).status == 422);
  CHECK(h2.call("POST", b2 + "/attempts", "helper", {{"item_id", current}, {"audio", "!!!"}}).status == 422);
  CHECK(h2.call("POST", b2 + "/attempts", "helper",
                {{"item_id", current}, {"audio", wav_b64(current, 1, 0)}, {"extra", true}}).status == 422);
  CHECK(h2.call("POST", b2 + "/attempts", "parent", manual_attempt(current, true)).status == 403);
  CHECK(h2.call("POST", b2 + "/launch", "helper", {{"angle_deg", 90}, {"speed", 1}}).status == 409);

  // Multipart upload finishes the round.
  HttpRequest mp = api_request("POST", b2 + "/attempts", "helper");
  const auto wav = encode_wav(synth_utterance(current, 4, 0.0));
  mp.parts = {MultipartPart{"item_id", "", "", current},
              MultipartPart{"audio", "clip.wav", "audio/wav", std::string(wav.begin(), wav.end())},
              MultipartPart{"gaze_dwell_ms", "", "", "900"}};
  const auto mr = h2.service.handle(mp);
  REQUIRE(mr.status == 200);
  const Json mj = Json::parse(mr.body);
  CHECK(mj["correct"] == true);
  CHECK(mj["phase"] == "Firing");
  CHECK(mj["power"] == 20.0);
  CHECK_FALSE(mj.contains("next_item"));
  CHECK(h2.call("POST", b2 + "/attempts", "helper", manual_attempt(current, true)).status == 409);

  const auto broke = h2.call("POST", b2 + "/launch", "helper", {{"angle_deg", 90}, {"speed", 25}});
  CHECK(broke.status == 422);
  CHECK(code_of(broke) == "insufficient_power");
  CHECK(h2.call("POST", b2 + "/launch", "helper", {{"angle_deg", 190}, {"speed", 5}}).status == 422);
  // Rejected launches leave the game as it was.
  const Json after = h2.ok("POST", b2 + "/launch", "helper", {{"angle_deg", 80}, {"speed", 5}});
  CHECK(after["power"] == 15.0);
  CHECK(after["round"] == 1);
  CHECK(h2.call("POST", "/api/v1/sessions/none/launch", "helper", {{"angle_deg", 90}, {"speed", 5}}).status == 404);
}

TEST_CASE("launches agree with a replay of the same script") {
  Harness h;
  const Json created = h.ok("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p1"}}, 201);
  const std::string base = "/api/v1/sessions/" + created["session_id"].get<std::string>();
  std::string current = created["presented_item"]["item_id"];
  for (int i = 0; i < 3; ++i) {
    const Json r = h.ok("POST", base + "/attempts", "helper", manual_attempt(current, true));
    if (r.contains("next_item")) current = r["next_item"]["item_id"];
  }
  const GameConfig& game = h.service.config().game;

  // Find an angle that captures a native from the known starting layout.
  double capture_angle = 0.0;
  for (double angle = 5.0; angle < 176.0 && capture_angle == 0.0; angle += 0.5) {
    std::vector<ScriptEntry> script(3, ScriptEntry{0, ReadingCommand{true}});
    script.push_back({0, LaunchCommand{angle, 10.0}});
    const auto st = run_until_resolved(replay(game, script));
    if (st.score == 100) capture_angle = angle;
  }
  REQUIRE(capture_angle > 0.0);

  const Json first = h.ok("POST", base + "/launch", "helper", {{"angle_deg", capture_angle}, {"speed", 10.0}});
  CHECK(first["score"] == 100);
  bool captured = false;
  for (const auto& e : first["events"]) captured |= e["kind"] == "NativeCaptured";
  CHECK(captured);
  const std::int64_t t1 = first["tick"];
  const Json second = h.ok("POST", base + "/launch", "helper", {{"angle_deg", capture_angle}, {"speed", 10.0}});

  std::vector<ScriptEntry> script(3, ScriptEntry{0, ReadingCommand{true}});
  script.push_back({0, LaunchCommand{capture_angle, 10.0}});
  script.push_back({t1, LaunchCommand{capture_angle, 10.0}});
  const auto replayed = run_until_resolved(replay(game, script));
  Json expected = Json::array();
  for (std::size_t i = 3; i < replayed.event_log.size(); ++i) expected.push_back(replayed.event_log[i]);
  Json got = first["events"];
  for (const auto& e : second["events"]) got.push_back(e);
  CHECK(got == expected);
  CHECK(second["score"] == replayed.score);
  CHECK(second["events"] != first["events"]);
}

TEST_CASE("finish persists the session and its flags") {
  Harness h;
  const Json created = h.ok("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p1"}}, 201);
  const std::string base = "/api/v1/sessions/" + created["session_id"].get<std::string>();
  CHECK(h.call("POST", base + "/finish", "helper").status == 409);
  std::string current = created["presented_item"]["item_id"];
  int attempts = 0;
  for (;;) {
    const Json r = h.ok("POST", base + "/attempts", "helper", manual_attempt(current, false));
    ++attempts;
    if (r["complete"] == true) break;
    REQUIRE(r.contains("next_item"));
    current = r["next_item"]["item_id"];
  }
  CHECK(attempts == 9);
  const Json record = h.ok("POST", base + "/finish", "helper");
  CHECK(record["attempts"].size() == 9);
  CHECK(h.call("POST", base + "/finish", "helper").status == 404);

  HttpRequest q = api_request("GET", "/api/v1/pupils/p1/records", "teacher");
  q.query["kind"] = "SessionCompleted";
  const Json sessions = Json::parse(h.service.handle(q).body);
  REQUIRE(sessions["events"].size() == 1);
  CHECK(sessions["events"][0]["body"]["attempts"].size() == 9);

  // Attempts were wrong and fresh: each item now sits at 0.35 with one attempt,
  // below the evidence gate, so no flags yet.
  const Json flags = h.ok("GET", "/api/v1/pupils/p1/flags", "parent");
  CHECK(flags["flags"].empty());
  const Json profile = h.ok("GET", "/api/v1/pupils/p1/profile", "teacher");
  CHECK(profile["attempts"].size() == 9);
  CHECK(profile["progression"]["ready"] == false);

  // A restarted service rebuilds the same profile from the log.
  Service again(h.service.config());
  const Json reloaded = Json::parse(again.handle(api_request("GET", "/api/v1/pupils/p1/profile", "teacher")).body);
  CHECK(reloaded == profile);
}

TEST_CASE("flags reach parents in priority order") {
  Harness h;
  // Five sessions of wrong answers over a 12-item band give items enough
  // attempts to flag.
  for (int s = 0; s < 5; ++s) {
    const Json created = h.ok("POST", "/api/v1/sessions", "helper", {{"pupil_id", "p1"}}, 201);
    const std::string base = "/api/v1/sessions/" + created["session_id"].get<std::string>();
    std::string current = created["presented_item"]["item_id"];
    for (;;) {
      const Json r = h.ok("POST", base + "/attempts", "helper", manual_attempt(current, false));
      if (r["complete"] == true) break;
      current = r["next_item"]["item_id"];
    }
    h.ok("POST", base + "/finish", "helper");
  }
  const Json flags = h.ok("GET", "/api/v1/pupils/p1/flags", "parent");
  REQUIRE_FALSE(flags["flags"].empty());
  int rank = 0;
  double last = -1.0;
  for (const auto& f : flags["flags"]) {
    CHECK(f["priority_rank"] == ++rank);
    CHECK(f["proficiency"].get<double>() >= last);
    last = f["proficiency"];
  }
  CHECK(h.call("GET", "/api/v1/pupils/p2/flags", "parent").status == 403);
  CHECK(h.call("GET", "/api/v1/pupils/p1/flags", "helper").status == 403);
  HttpRequest q = api_request("GET", "/api/v1/pupils/p1/records", "parent");
  q.query["kind"] = "FlagRaised";
  const Json raised = Json::parse(h.service.handle(q).body);
  CHECK_FALSE(raised["events"].empty());
}

TEST_CASE("records queries and remarks") {
  Harness h;
  const Json remark{{"date", "2012-06-17"}, {"material", "The new baby"}, {"remarks", "Well done."}};
  const Json added = h.ok("POST", "/api/v1/pupils/p1/remarks", "teacher", remark, 201);
  CHECK(added["event_id"] == 1);
  CHECK(added["kind"] == "RemarkAdded");
  h.ok("POST", "/api/v1/pupils/p1/remarks", "teacher",
       {{"date", "2012-06-27"}, {"material", "Bird"}, {"remarks", "Excellent."}, {"author_initials", "SE"}}, 201);
  CHECK(h.call("POST", "/api/v1/pupils/p1/remarks", "helper", remark).status == 403);
  CHECK(h.call("POST", "/api/v1/pupils/p1/remarks", "parent", remark).status == 403);
  CHECK(h.call("POST", "/api/v1/pupils/zz/remarks", "teacher", remark).status == 404);
  CHECK(h.call("POST", "/api/v1/pupils/p1/remarks", "teacher",
               {{"date", "17/6/12"}, {"material", "x"}, {"remarks", "y"}}).status == 422);
  CHECK(h.call("POST", "/api/v1/pupils/p1/remarks", "teacher",
               {{"date", "2012-06-17"}, {"material", "x"}, {"remarks", ""}}).status == 422);

  auto query = [&](std::map<std::string, std::string> params, const std::string& token = "teacher") {
    HttpRequest r = api_request("GET", "/api/v1/pupils/p1/records", token);
    r.query = std::move(params);
    return h.service.handle(r);
  };
  CHECK(Json::parse(query({}).body)["events"].size() == 2);
  CHECK(Json::parse(query({{"to", "2012-06-17"}}).body)["events"].size() == 1);
  CHECK(Json::parse(query({{"from", "2012-06-18"}}).body)["events"].size() == 1);
  CHECK(Json::parse(query({{"kind", "FlagRaised,SessionCompleted"}}).body)["events"].empty());
  CHECK(query({{"kind", "Nope"}}).status == 400);
  CHECK(query({{"from", "soon"}}).status == 400);
  CHECK(query({}, "parent").status == 200);
  CHECK(query({}, "helper").status == 403);
  CHECK(h.call("GET", "/api/v1/pupils/zz/records", "teacher").status == 404);
}

TEST_CASE("items") {
  Harness h;
  CHECK(h.ok("GET", "/api/v1/items", "helper")["items"].size() == h.service.bank().items().size());
  HttpRequest r = api_request("GET", "/api/v1/items", "teacher");
  r.query["band"] = "2";
  const Json band2 = Json::parse(h.service.handle(r).body);
  CHECK(band2["items"].size() == h.service.bank().band_items(2).size());
  r.query["band"] = "99";
  CHECK(h.service.handle(r).status == 404);
  r.query["band"] = "two";
  CHECK(h.service.handle(r).status == 400);
  CHECK(h.call("GET", "/api/v1/items", "").status == 401);
}

TEST_CASE("rejected and read-only requests leave the store untouched") {
  Harness h;
  h.ok("POST", "/api/v1/pupils/p1/remarks", "teacher",
       {{"date", "2012-06-17"}, {"material", "A"}, {"remarks", "B"}}, 201);
  const std::string before = h.service.store().digest();
  h.call("POST", "/api/v1/pupils/p1/remarks", "parent", {{"date", "2012-06-17"}, {"material", "A"}, {"remarks", "B"}});
  h.call("POST", "/api/v1/pupils/p1/remarks", "", {{"date", "2012-06-17"}, {"material", "A"}, {"remarks", "B"}});
  h.call("POST", "/api/v1/sessions", "parent", {{"pupil_id", "p1"}});
  h.call("GET", "/api/v1/pupils/p1/records", "teacher");
  h.call("GET", "/api/v1/pupils/p1/flags", "parent");
  h.call("GET", "/api/v1/pupils/p1/profile", "helper");
  CHECK(h.service.store().digest() == before);
}

TEST_CASE("config parsing") {
  fixture::TempDir dir;
  const Json good = Json::parse(R"({
    "port": 9000, "store": "data/records.log", "seed": 5,
    "tokens": [{"token": "t", "role": "teacher"},
               {"token": "p", "role": "parent", "id": "mum", "pupils": ["p1"]}],
    "pupils": [{"pupil_id": "p1", "ability_band": 2}],
    "session": {"ema_alpha": 0.2}
  })");
  const auto c = ServiceConfig::from_json(good, dir.path());
  CHECK(c.port == 9000);
  CHECK(c.store_path == dir.path() / "data/records.log");
  CHECK(c.seed == 5);
  CHECK(c.principals.size() == 2);
  CHECK(c.principals[1].pupils == std::set<std::string>{"p1"});
  CHECK(c.pupils[0].ability_band == 2);
  CHECK(c.session.ema_alpha == 0.2);

  auto rejects = [&](auto mutate) {
    Json j = good;
    mutate(j);
    try {
      ServiceConfig::from_json(j, dir.path());
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
    return false;
  };
  CHECK(rejects([](Json& j) { j["tokens"][1]["pupils"] = Json::array(); }));
  CHECK(rejects([](Json& j) { j["tokens"][1]["token"] = "t"; }));
  CHECK(rejects([](Json& j) { j["tokens"][1]["pupils"] = {"ghost"}; }));
  CHECK(rejects([](Json& j) { j["tokens"][0]["role"] = "janitor"; }));
  CHECK(rejects([](Json& j) { j.erase("store"); }));
  CHECK(rejects([](Json& j) { j["colour"] = "blue"; }));
  CHECK(rejects([](Json& j) { j["session"]["ema_alpha"] = 2.0; }));
}

TEST_CASE("base64") {
  for (const std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"})
    CHECK(base64_decode(base64_encode(s)) == s);
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  CHECK_THROWS_AS(base64_decode("Zm9v!mFy"), Error);
  CHECK_THROWS_AS(base64_decode("Zm9"), Error);
}

TEST_CASE("socket transport") {
  fixture::TempDir dir;
  Service service(fixture::service_config(dir / "records.log"));
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread runner([&] { server.run(); });

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);

  httplib::Headers auth{{"Authorization", "Bearer helper"}};
  auto created = client.Post("/api/v1/sessions", auth, R"({"pupil_id":"p2"})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const Json body = Json::parse(created->body);
  const std::string item = body["presented_item"]["item_id"];

  const auto wav = encode_wav(synth_utterance(item, 2, 0.0));
  httplib::MultipartFormDataItems form{
      {"item_id", item, "", ""},
      {"audio", std::string(wav.begin(), wav.end()), "clip.wav", "audio/wav"}};
  auto attempt = client.Post("/api/v1/sessions/" + body["session_id"].get<std::string>() + "/attempts",
                             auth, form);
  REQUIRE(attempt);
  CHECK(attempt->status == 200);
  CHECK(Json::parse(attempt->body)["correct"] == true);

  auto forbidden = client.Get("/api/v1/pupils/p2/records", httplib::Headers{{"Authorization", "Bearer helper"}});
  REQUIRE(forbidden);
  CHECK(forbidden->status == 403);

  server.stop();
  runner.join();
}
