#pragma once

// JSON encoding of domain values. Decoding is strict: missing required
// fields, wrong types and unknown fields all raise Error{Parse}.

#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vocal/assessment.hpp"
#include "vocal/error.hpp"
#include "vocal/game.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/session.hpp"
#include "vocal/time.hpp"

namespace vocal {

using Json = nlohmann::json;

/// Field access on a JSON object that has been checked against an allow-list.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string_view what, std::initializer_list<std::string_view> allowed);

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const char* key) const;

  std::string string(const char* key) const;
  double number(const char* key) const;
  std::int64_t integer(const char* key) const;
  bool boolean(const char* key) const;
  Timestamp timestamp(const char* key) const;

  std::optional<std::string> opt_string(const char* key) const;
  std::optional<double> opt_number(const char* key) const;
  std::optional<std::int64_t> opt_integer(const char* key) const;

 private:
  const Json& j_;
  std::string what_;
};

/// Parses text, mapping syntax errors to Error{Parse}.
Json parse_json(std::string_view text);

/// j.get<T>() with library exceptions mapped to Error{Parse}.
template <typename T>
T decode(const Json& j) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

void to_json(Json& j, const Timestamp& v);
void from_json(const Json& j, Timestamp& v);
void to_json(Json& j, const PhonicsItem& v);
void from_json(const Json& j, PhonicsItem& v);
void to_json(Json& j, const FeatureSequence& v);
void from_json(const Json& j, FeatureSequence& v);
void to_json(Json& j, const RecognitionResult& v);
void from_json(const Json& j, RecognitionResult& v);
void to_json(Json& j, const Attempt& v);
void from_json(const Json& j, Attempt& v);
void to_json(Json& j, const Flag& v);
void from_json(const Json& j, Flag& v);
void to_json(Json& j, const Progression& v);
void from_json(const Json& j, Progression& v);
void to_json(Json& j, const PupilProfile& v);
void from_json(const Json& j, PupilProfile& v);
void to_json(Json& j, const GameEvent& v);
void from_json(const Json& j, GameEvent& v);
void to_json(Json& j, const ScriptEntry& v);
void from_json(const Json& j, ScriptEntry& v);
void to_json(Json& j, const GameConfig& v);
void from_json(const Json& j, GameConfig& v);
void to_json(Json& j, const SessionConfig& v);
void from_json(const Json& j, SessionConfig& v);
void to_json(Json& j, const SessionRecord& v);
void from_json(const Json& j, SessionRecord& v);

/// One JSON record per line; used for replay files and command scripts.
std::string events_to_jsonl(std::span<const GameEvent> events);
std::vector<GameEvent> events_from_jsonl(std::string_view text);
std::string script_to_jsonl(std::span<const ScriptEntry> script);
std::vector<ScriptEntry> script_from_jsonl(std::string_view text);

/// Template files: one {"item_id", "features"} record per line.
std::string templates_to_jsonl(const TemplateSet& templates);
TemplateSet templates_from_jsonl(std::string_view text);

}  // namespace vocal
