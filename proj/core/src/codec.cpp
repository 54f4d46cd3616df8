#include "vocal/codec.hpp"

#include <algorithm>
#include <cmath>

namespace vocal {

ObjectReader::ObjectReader(const Json& j, std::string_view what,
                           std::initializer_list<std::string_view> allowed)
    : j_(j), what_(what) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, what_ + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::Parse, what_ + ": unknown field '" + key + "'");
}

const Json& ObjectReader::at(const char* key) const {
  if (!has(key)) throw Error(ErrorCode::Parse, what_ + ": missing field '" + key + "'");
  return j_.at(key);
}

std::string ObjectReader::string(const char* key) const {
  const Json& v = at(key);
  if (!v.is_string()) throw Error(ErrorCode::Parse, what_ + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

double ObjectReader::number(const char* key) const {
  const Json& v = at(key);
  if (!v.is_number()) throw Error(ErrorCode::Parse, what_ + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t ObjectReader::integer(const char* key) const {
  const Json& v = at(key);
  if (!v.is_number_integer())
    throw Error(ErrorCode::Parse, what_ + ": '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool ObjectReader::boolean(const char* key) const {
  const Json& v = at(key);
  if (!v.is_boolean()) throw Error(ErrorCode::Parse, what_ + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

Timestamp ObjectReader::timestamp(const char* key) const {
  auto ts = parse_timestamp(string(key));
  if (!ts) throw Error(ErrorCode::Parse, what_ + ": '" + key + "' is not a timestamp");
  return *ts;
}

std::optional<std::string> ObjectReader::opt_string(const char* key) const {
  if (!has(key)) return std::nullopt;
  return string(key);
}

std::optional<double> ObjectReader::opt_number(const char* key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::optional<std::int64_t> ObjectReader::opt_integer(const char* key) const {
  if (!has(key)) return std::nullopt;
  return integer(key);
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

void to_json(Json& j, const Timestamp& v) { j = format_timestamp(v); }

void from_json(const Json& j, Timestamp& v) {
  if (!j.is_string()) throw Error(ErrorCode::Parse, "timestamp must be a string");
  auto ts = parse_timestamp(j.get<std::string>());
  if (!ts) throw Error(ErrorCode::Parse, "bad timestamp '" + j.get<std::string>() + "'");
  v = *ts;
}

void to_json(Json& j, const PhonicsItem& v) {
  j = Json{{"item_id", v.item_id}, {"text", v.text}, {"kind", to_string(v.kind)}, {"band", v.band}};
}

void from_json(const Json& j, PhonicsItem& v) {
  ObjectReader r(j, "item", {"item_id", "text", "kind", "band"});
  v.item_id = r.string("item_id");
  v.text = r.string("text");
  v.kind = parse_item_kind(r.string("kind"));
  v.band = static_cast<int>(r.integer("band"));
}

void to_json(Json& j, const FeatureSequence& v) {
  Json frames = Json::array();
  for (std::size_t t = 0; t < v.frames(); ++t) {
    auto row = v.frame(t);
    frames.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  j = Json{{"frame_ms", FeatureSequence::kFrameMs},
           {"hop_ms", FeatureSequence::kHopMs},
           {"dims", FeatureSequence::kDims},
           {"normalized", v.normalized()},
           {"frames", std::move(frames)}};
}

void from_json(const Json& j, FeatureSequence& v) {
  ObjectReader r(j, "features", {"frame_ms", "hop_ms", "dims", "normalized", "frames"});
  if (r.integer("frame_ms") != FeatureSequence::kFrameMs || r.integer("hop_ms") != FeatureSequence::kHopMs)
    throw Error(ErrorCode::Parse, "features: frame_ms/hop_ms must be 25/10");
  if (r.integer("dims") != static_cast<std::int64_t>(FeatureSequence::kDims))
    throw Error(ErrorCode::Parse, "features: dims must be 10");
  const bool normalized = r.has("normalized") ? r.boolean("normalized") : false;
  const Json& frames = r.at("frames");
  if (!frames.is_array() || frames.empty())
    throw Error(ErrorCode::Parse, "features: frames must be a non-empty array");
  std::vector<double> values;
  values.reserve(frames.size() * FeatureSequence::kDims);
  for (const auto& row : frames) {
    if (!row.is_array() || row.size() != FeatureSequence::kDims)
      throw Error(ErrorCode::Parse, "features: every frame must have 10 values");
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorCode::Parse, "features: non-numeric value");
      values.push_back(x.get<double>());
    }
  }
  try {
    v = FeatureSequence(frames.size(), std::move(values), normalized);
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

void to_json(Json& j, const RecognitionResult& v) {
  j = Json{{"decision", v.accepted() ? "accepted" : "rejected"},
           {"best_score", v.best_score},
           {"scores", v.per_candidate_scores}};
  if (v.accepted_item) j["item_id"] = *v.accepted_item;
  if (v.loudness_dbfs) j["loudness_dbfs"] = *v.loudness_dbfs;
}

void from_json(const Json& j, RecognitionResult& v) {
  ObjectReader r(j, "recognition", {"decision", "item_id", "best_score", "scores", "loudness_dbfs"});
  const std::string decision = r.string("decision");
  if (decision != "accepted" && decision != "rejected")
    throw Error(ErrorCode::Parse, "recognition: bad decision '" + decision + "'");
  v.accepted_item = r.opt_string("item_id");
  if ((decision == "accepted") != v.accepted_item.has_value())
    throw Error(ErrorCode::Parse, "recognition: item_id must be present exactly when accepted");
  v.best_score = r.number("best_score");
  v.per_candidate_scores = decode<std::map<std::string, double>>(r.at("scores"));
  v.loudness_dbfs = r.opt_number("loudness_dbfs");
}

void to_json(Json& j, const Attempt& v) {
  j = Json{{"session_id", v.session_id},
           {"item_id", v.item_id},
           {"presented_at", v.presented_at},
           {"result", v.result},
           {"correct", v.correct}};
  if (v.gaze_dwell_ms) j["gaze_dwell_ms"] = *v.gaze_dwell_ms;
  if (v.confidence) j["confidence"] = *v.confidence;
  if (v.manual) j["manual"] = true;
}

void from_json(const Json& j, Attempt& v) {
  ObjectReader r(j, "attempt", {"session_id", "item_id", "presented_at", "result", "correct",
                                "gaze_dwell_ms", "confidence", "manual"});
  v.session_id = r.string("session_id");
  v.item_id = r.string("item_id");
  v.presented_at = r.timestamp("presented_at");
  v.result = decode<RecognitionResult>(r.at("result"));
  v.correct = r.boolean("correct");
  if (auto dwell = r.opt_integer("gaze_dwell_ms")) v.gaze_dwell_ms = static_cast<int>(*dwell);
  else v.gaze_dwell_ms.reset();
  v.confidence = r.opt_number("confidence");
  v.manual = r.has("manual") && r.boolean("manual");
}

void to_json(Json& j, const Flag& v) {
  j = Json{{"pupil_id", v.pupil_id},       {"item_id", v.item_id},
           {"proficiency", v.proficiency}, {"attempts", v.attempts},
           {"priority_rank", v.priority_rank}, {"raised_at", v.raised_at}};
}

void from_json(const Json& j, Flag& v) {
  ObjectReader r(j, "flag",
                 {"pupil_id", "item_id", "proficiency", "attempts", "priority_rank", "raised_at"});
  v.pupil_id = r.string("pupil_id");
  v.item_id = r.string("item_id");
  v.proficiency = r.number("proficiency");
  v.attempts = static_cast<int>(r.integer("attempts"));
  v.priority_rank = static_cast<int>(r.integer("priority_rank"));
  v.raised_at = r.timestamp("raised_at");
}

void to_json(Json& j, const Progression& v) { j = Json{{"ready", v.ready}, {"band", v.band}}; }

void from_json(const Json& j, Progression& v) {
  ObjectReader r(j, "progression", {"ready", "band"});
  v.ready = r.boolean("ready");
  v.band = static_cast<int>(r.integer("band"));
}

void to_json(Json& j, const PupilProfile& v) {
  Json history = Json::array();
  for (const auto& c : v.confidence_history) history.push_back(Json{{"at", c.at}, {"value", c.value}});
  j = Json{{"pupil_id", v.pupil_id},       {"ability_band", v.ability_band},
           {"proficiency", v.proficiency}, {"attempts", v.attempts},
           {"confidence_history", std::move(history)}};
}

void from_json(const Json& j, PupilProfile& v) {
  ObjectReader r(j, "profile",
                 {"pupil_id", "ability_band", "proficiency", "attempts", "confidence_history"});
  v.pupil_id = r.string("pupil_id");
  v.ability_band = static_cast<int>(r.integer("ability_band"));
  v.proficiency = decode<std::map<std::string, double>>(r.at("proficiency"));
  v.attempts = decode<std::map<std::string, int>>(r.at("attempts"));
  v.confidence_history.clear();
  for (const auto& c : r.at("confidence_history")) {
    ObjectReader cr(c, "confidence sample", {"at", "value"});
    v.confidence_history.push_back(ConfidenceSample{cr.timestamp("at"), cr.number("value")});
  }
}

namespace {

OverReason parse_over_reason(const std::string& s) {
  if (s == "Flooded") return OverReason::Flooded;
  if (s == "AllCaptured") return OverReason::AllCaptured;
  if (s == "None") return OverReason::None;
  throw Error(ErrorCode::Parse, "unknown game-over reason '" + s + "'");
}

}  // namespace

void to_json(Json& j, const GameEvent& v) {
  j = Json{{"tick", v.tick}, {"kind", event_kind(v)}};
  std::visit(
      [&j](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, PowerGained>) {
          j["amount"] = e.amount;
        } else if constexpr (std::is_same_v<T, BubbleLaunched>) {
          j["bubble"] = e.bubble;
          j["angle_deg"] = e.angle_deg;
          j["speed"] = e.speed;
        } else if constexpr (std::is_same_v<T, NativeCaptured>) {
          j["index"] = e.index;
          j["bubble"] = e.bubble;
        } else if constexpr (std::is_same_v<T, BubbleExpired>) {
          j["bubble"] = e.bubble;
        } else if constexpr (std::is_same_v<T, FloodAdvanced>) {
          j["level"] = e.level;
        } else if constexpr (std::is_same_v<T, RoundStarted>) {
          j["round"] = e.round;
        } else {
          j["reason"] = to_string(e.reason);
        }
      },
      v.payload);
}

void from_json(const Json& j, GameEvent& v) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::Parse, "game event needs a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  auto bubble = [](const ObjectReader& r) { return static_cast<std::uint32_t>(r.integer("bubble")); };
  if (kind == "PowerGained") {
    ObjectReader r(j, "PowerGained", {"tick", "kind", "amount"});
    v = GameEvent{r.integer("tick"), PowerGained{r.number("amount")}};
  } else if (kind == "BubbleLaunched") {
    ObjectReader r(j, "BubbleLaunched", {"tick", "kind", "bubble", "angle_deg", "speed"});
    v = GameEvent{r.integer("tick"), BubbleLaunched{bubble(r), r.number("angle_deg"), r.number("speed")}};
  } else if (kind == "NativeCaptured") {
    ObjectReader r(j, "NativeCaptured", {"tick", "kind", "index", "bubble"});
    v = GameEvent{r.integer("tick"),
                  NativeCaptured{static_cast<std::size_t>(r.integer("index")), bubble(r)}};
  } else if (kind == "BubbleExpired") {
    ObjectReader r(j, "BubbleExpired", {"tick", "kind", "bubble"});
    v = GameEvent{r.integer("tick"), BubbleExpired{bubble(r)}};
  } else if (kind == "FloodAdvanced") {
    ObjectReader r(j, "FloodAdvanced", {"tick", "kind", "level"});
    v = GameEvent{r.integer("tick"), FloodAdvanced{r.number("level")}};
  } else if (kind == "RoundStarted") {
    ObjectReader r(j, "RoundStarted", {"tick", "kind", "round"});
    v = GameEvent{r.integer("tick"), RoundStarted{static_cast<int>(r.integer("round"))}};
  } else if (kind == "GameOver") {
    ObjectReader r(j, "GameOver", {"tick", "kind", "reason"});
    v = GameEvent{r.integer("tick"), GameOver{parse_over_reason(r.string("reason"))}};
  } else {
    throw Error(ErrorCode::Parse, "unknown game event kind '" + kind + "'");
  }
}

void to_json(Json& j, const ScriptEntry& v) {
  j = Json{{"tick", v.tick}};
  std::visit(
      [&j](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ReadingCommand>) {
          j["command"] = "reading";
          j["correct"] = c.correct;
        } else if constexpr (std::is_same_v<T, LaunchCommand>) {
          j["command"] = "launch";
          j["angle_deg"] = c.angle_deg;
          j["speed"] = c.speed;
        } else if constexpr (std::is_same_v<T, BeginRoundCommand>) {
          j["command"] = "begin_round";
        } else {
          j["command"] = "advance";
        }
      },
      v.command);
}

void from_json(const Json& j, ScriptEntry& v) {
  if (!j.is_object() || !j.contains("command") || !j["command"].is_string())
    throw Error(ErrorCode::Parse, "script entry needs a string 'command'");
  const std::string command = j["command"].get<std::string>();
  if (command == "reading") {
    ObjectReader r(j, "reading", {"tick", "command", "correct"});
    v = ScriptEntry{r.integer("tick"), ReadingCommand{r.boolean("correct")}};
  } else if (command == "launch") {
    ObjectReader r(j, "launch", {"tick", "command", "angle_deg", "speed"});
    v = ScriptEntry{r.integer("tick"), LaunchCommand{r.number("angle_deg"), r.number("speed")}};
  } else if (command == "begin_round") {
    ObjectReader r(j, "begin_round", {"tick", "command"});
    v = ScriptEntry{r.integer("tick"), BeginRoundCommand{}};
  } else if (command == "advance") {
    ObjectReader r(j, "advance", {"tick", "command"});
    v = ScriptEntry{r.integer("tick"), AdvanceCommand{}};
  } else {
    throw Error(ErrorCode::Parse, "unknown script command '" + command + "'");
  }
}

void to_json(Json& j, const GameConfig& v) {
  j = Json{{"gravity", v.gravity},
           {"island_half_width", v.island_half_width},
           {"launch_height", v.launch_height},
           {"bubble_radius", v.bubble_radius},
           {"native_radius", v.native_radius},
           {"native_speed", v.native_speed},
           {"flood_rate", v.flood_rate},
           {"island_height", v.island_height},
           {"power_per_correct", v.power_per_correct},
           {"max_speed", v.max_speed},
           {"bubbles_per_powerup", v.bubbles_per_powerup},
           {"native_count", v.native_count},
           {"seed", v.seed}};
}

void from_json(const Json& j, GameConfig& v) {
  ObjectReader r(j, "game config",
                 {"gravity", "island_half_width", "launch_height", "bubble_radius", "native_radius",
                  "native_speed", "flood_rate", "island_height", "power_per_correct", "max_speed",
                  "bubbles_per_powerup", "native_count", "seed"});
  GameConfig c;
  auto num = [&r](const char* key, double& out) {
    if (auto x = r.opt_number(key)) out = *x;
  };
  num("gravity", c.gravity);
  num("island_half_width", c.island_half_width);
  num("launch_height", c.launch_height);
  num("bubble_radius", c.bubble_radius);
  num("native_radius", c.native_radius);
  num("native_speed", c.native_speed);
  num("flood_rate", c.flood_rate);
  num("island_height", c.island_height);
  num("power_per_correct", c.power_per_correct);
  num("max_speed", c.max_speed);
  if (auto x = r.opt_integer("bubbles_per_powerup")) c.bubbles_per_powerup = static_cast<int>(*x);
  if (auto x = r.opt_integer("native_count")) c.native_count = static_cast<int>(*x);
  if (r.has("seed")) c.seed = decode<std::uint64_t>(r.at("seed"));
  v = c;
}

void to_json(Json& j, const SessionConfig& v) {
  j = Json{{"flag_threshold", v.flag_threshold},
           {"min_attempts", v.min_attempts},
           {"ema_alpha", v.ema_alpha},
           {"prior_proficiency", v.prior_proficiency},
           {"progress_threshold", v.progress_threshold},
           {"progress_min_attempts_per_item", v.progress_min_attempts_per_item},
           {"items_per_session", v.items_per_session},
           {"reject_threshold", v.reject_threshold}};
}

void from_json(const Json& j, SessionConfig& v) {
  ObjectReader r(j, "session config",
                 {"flag_threshold", "min_attempts", "ema_alpha", "prior_proficiency",
                  "progress_threshold", "progress_min_attempts_per_item", "items_per_session",
                  "reject_threshold"});
  SessionConfig c;
  auto num = [&r](const char* key, double& out) {
    if (auto x = r.opt_number(key)) out = *x;
  };
  auto whole = [&r](const char* key, int& out) {
    if (auto x = r.opt_integer(key)) out = static_cast<int>(*x);
  };
  num("flag_threshold", c.flag_threshold);
  whole("min_attempts", c.min_attempts);
  num("ema_alpha", c.ema_alpha);
  num("prior_proficiency", c.prior_proficiency);
  num("progress_threshold", c.progress_threshold);
  whole("progress_min_attempts_per_item", c.progress_min_attempts_per_item);
  whole("items_per_session", c.items_per_session);
  num("reject_threshold", c.reject_threshold);
  v = c;
}

void to_json(Json& j, const SessionRecord& v) {
  j = Json{{"session_id", v.session_id},   {"pupil_id", v.pupil_id},
           {"helper_id", v.helper_id},     {"started_at", v.started_at},
           {"ended_at", v.ended_at},       {"ability_band", v.ability_band},
           {"attempts", v.attempts},       {"game_events", v.game_events},
           {"final_score", v.final_score}, {"flags_after", v.flags_after},
           {"progression", v.progression}};
}

void from_json(const Json& j, SessionRecord& v) {
  ObjectReader r(j, "session record",
                 {"session_id", "pupil_id", "helper_id", "started_at", "ended_at", "ability_band",
                  "attempts", "game_events", "final_score", "flags_after", "progression"});
  v.session_id = r.string("session_id");
  v.pupil_id = r.string("pupil_id");
  v.helper_id = r.string("helper_id");
  v.started_at = r.timestamp("started_at");
  v.ended_at = r.timestamp("ended_at");
  v.ability_band = static_cast<int>(r.integer("ability_band"));
  v.attempts = decode<std::vector<Attempt>>(r.at("attempts"));
  v.game_events = decode<std::vector<GameEvent>>(r.at("game_events"));
  v.final_score = static_cast<int>(r.integer("final_score"));
  v.flags_after = decode<std::vector<Flag>>(r.at("flags_after"));
  v.progression = decode<Progression>(r.at("progression"));
}

namespace {

template <typename T>
std::string to_lines(std::span<const T> values) {
  std::string out;
  for (const auto& v : values) {
    out += Json(v).dump();
    out += '\n';
  }
  return out;
}

template <typename T>
std::vector<T> from_lines(std::string_view text) {
  std::vector<T> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(decode<T>(parse_json(line)));
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(line_no));
    }
  }
  return out;
}

}  // namespace

std::string events_to_jsonl(std::span<const GameEvent> events) { return to_lines(events); }
std::vector<GameEvent> events_from_jsonl(std::string_view text) { return from_lines<GameEvent>(text); }
std::string script_to_jsonl(std::span<const ScriptEntry> script) { return to_lines(script); }
std::vector<ScriptEntry> script_from_jsonl(std::string_view text) {
  return from_lines<ScriptEntry>(text);
}

std::string templates_to_jsonl(const TemplateSet& templates) {
  std::string out;
  for (const auto& [id, tpl] : templates) {
    out += Json{{"item_id", id}, {"features", tpl.features}}.dump();
    out += '\n';
  }
  return out;
}

TemplateSet templates_from_jsonl(std::string_view text) {
  TemplateSet set;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json j = parse_json(line);
      ObjectReader r(j, "template", {"item_id", "features"});
      set.insert(Template{r.string("item_id"), decode<FeatureSequence>(r.at("features"))});
    } catch (const Error& e) {
      throw e.with_context("template line " + std::to_string(line_no));
    }
  }
  return set;
}

}  // namespace vocal
