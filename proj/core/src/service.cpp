#include "vocal/service.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vocal/audio.hpp"
#include "vocal/error.hpp"
#include "vocal/rng.hpp"

namespace vocal {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Teacher: return "teacher";
    case Role::Helper: return "helper";
    case Role::Parent: return "parent";
  }
  return "helper";
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text)
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
  if (clean.size() % 4 != 0) throw Error(ErrorCode::Parse, "base64: length is not a multiple of 4");
  std::string out(3 * clean.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorCode::Parse, "base64: invalid character");
  // EVP_DecodeBlock keeps the bytes that padding stands for.
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

// ---------------------------------------------------------------------------
// config

namespace {

Role parse_role(const std::string& text) {
  if (text == "teacher") return Role::Teacher;
  if (text == "helper") return Role::Helper;
  if (text == "parent") return Role::Parent;
  throw Error(ErrorCode::InvalidConfig, "unknown role '" + text + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  try {
    ObjectReader r(j, "service config",
                   {"listen", "port", "bank", "store", "templates", "seed", "tokens", "pupils",
                    "game", "session"});
    ServiceConfig c;
    if (auto listen = r.opt_string("listen")) c.listen_address = *listen;
    if (auto port = r.opt_integer("port")) c.port = static_cast<int>(*port);
    if (auto bank = r.opt_string("bank")) c.bank_path = resolve(base_dir, *bank);
    c.store_path = resolve(base_dir, r.string("store"));
    if (auto t = r.opt_string("templates")) c.templates_path = resolve(base_dir, *t);
    if (r.has("seed")) c.seed = decode<std::uint64_t>(r.at("seed"));
    if (r.has("game")) c.game = decode<GameConfig>(r.at("game"));
    if (r.has("session")) c.session = decode<SessionConfig>(r.at("session"));

    if (!r.at("tokens").is_array()) throw Error(ErrorCode::Parse, "tokens must be an array");
    std::set<std::string> seen_tokens;
    for (const auto& t : r.at("tokens")) {
      ObjectReader tr(t, "token", {"token", "role", "id", "pupils"});
      Principal p;
      p.token = tr.string("token");
      p.role = parse_role(tr.string("role"));
      p.id = tr.opt_string("id").value_or(std::string(to_string(p.role)));
      if (tr.has("pupils"))
        for (const auto& id : tr.at("pupils")) p.pupils.insert(decode<std::string>(id));
      if (p.token.empty()) throw Error(ErrorCode::InvalidConfig, "empty token");
      if (!seen_tokens.insert(p.token).second)
        throw Error(ErrorCode::InvalidConfig, "duplicate token");
      if (p.role == Role::Parent && p.pupils.empty())
        throw Error(ErrorCode::InvalidConfig, "parent token '" + p.id + "' has no pupils");
      c.principals.push_back(std::move(p));
    }

    if (!r.at("pupils").is_array()) throw Error(ErrorCode::Parse, "pupils must be an array");
    std::set<std::string> seen_pupils;
    for (const auto& entry : r.at("pupils")) {
      ObjectReader pr(entry, "pupil", {"pupil_id", "ability_band"});
      PupilEntry pupil;
      pupil.pupil_id = pr.string("pupil_id");
      if (auto band = pr.opt_integer("ability_band")) pupil.ability_band = static_cast<int>(*band);
      if (pupil.pupil_id.empty()) throw Error(ErrorCode::InvalidConfig, "empty pupil_id");
      if (!seen_pupils.insert(pupil.pupil_id).second)
        throw Error(ErrorCode::InvalidConfig, "duplicate pupil '" + pupil.pupil_id + "'");
      c.pupils.push_back(std::move(pupil));
    }
    for (const auto& p : c.principals)
      for (const auto& id : p.pupils)
        if (!seen_pupils.count(id))
          throw Error(ErrorCode::InvalidConfig, "token '" + p.id + "' names unknown pupil '" + id + "'");
    if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");
    c.game.validate();
    c.session.validate();
    return c;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ServiceConfig config;
  try {
    config = ServiceConfig::from_json(parse_json(ss.str()), path.parent_path());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
  if (const char* port = std::getenv("VOCAL_PORT"); port && *port) {
    int value = 0;
    const std::string_view text(port);
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || value < 0 || value > 65535)
      throw Error(ErrorCode::InvalidConfig, "VOCAL_PORT is not a valid port");
    config.port = value;
  }
  return config;
}

// ---------------------------------------------------------------------------
// service

namespace {

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

HttpResponse json_response(int status, const Json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(const ApiError& e) {
  return json_response(e.status, Json{{"status", e.status}, {"code", e.code}, {"message", e.message}});
}

ApiError api_error(const Error& e) {
  const std::string code(to_string(e.code()));
  switch (e.code()) {
    case ErrorCode::WrongPhase:
    case ErrorCode::Conflict: return {409, code, e.what()};
    case ErrorCode::NotFound:
    case ErrorCode::UnknownBand: return {404, code, e.what()};
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::TooShort:
    case ErrorCode::NotNormalized:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::InsufficientPower:
    case ErrorCode::OutOfRange:
    case ErrorCode::Range: return {422, code, e.what()};
    default: return {500, code, e.what()};
  }
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

Json body_json(const HttpRequest& request) {
  if (request.body.empty()) return Json::object();
  try {
    Json j = Json::parse(request.body);
    if (!j.is_object()) throw ApiError{422, "parse", "request body must be a JSON object"};
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ApiError{400, "bad_json", e.what()};
  }
}

std::optional<Timestamp> query_time(const HttpRequest& request, const char* key, bool end_of_day) {
  auto it = request.query.find(key);
  if (it == request.query.end() || it->second.empty()) return std::nullopt;
  if (auto date = parse_date(it->second)) {
    Timestamp t = from_date(*date);
    if (end_of_day) t.ms += 86'400'000 - 1;
    return t;
  }
  if (auto t = parse_timestamp(it->second)) return t;
  throw ApiError{400, "bad_query", std::string("cannot parse '") + key + "'"};
}

std::span<const unsigned char> byte_view(const std::string& s) {
  return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

Json game_status(const GameState& g) {
  Json j{{"phase", to_string(g.phase)},
         {"power", g.power},
         {"score", g.score},
         {"flood_level", g.flood_level},
         {"round", g.round},
         {"tick", g.tick_index}};
  if (g.phase == Phase::Over) j["over_reason"] = to_string(g.over_reason);
  return j;
}

}  // namespace

struct Service::Live {
  std::mutex mutex;
  std::string owner_token;
  std::string pupil_id;
  LiveSession session;

  Live(std::string owner, std::string pupil, LiveSession s)
      : owner_token(std::move(owner)), pupil_id(std::move(pupil)), session(std::move(s)) {}
};

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  config_.game.validate();
  config_.session.validate();
  bank_ = std::make_shared<const ItemBank>(config_.bank_path.empty() ? default_bank()
                                                                      : load_bank_file(config_.bank_path));
  if (config_.templates_path) {
    std::ifstream in(*config_.templates_path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open templates " + config_.templates_path->string());
    std::stringstream ss;
    ss << in.rdbuf();
    templates_ = std::make_shared<const TemplateSet>(templates_from_jsonl(ss.str()));
  } else {
    templates_ = std::make_shared<const TemplateSet>(synth_templates(*bank_));
  }
  for (const auto& item : bank_->items())
    if (!templates_->find(item.item_id))
      throw Error(ErrorCode::InvalidConfig, "no template for item '" + item.item_id + "'");

  for (const auto& p : config_.principals) principals_.emplace(p.token, p);
  for (const auto& p : config_.pupils) {
    if (!bank_->has_band(p.ability_band))
      throw Error(ErrorCode::InvalidConfig, "pupil '" + p.pupil_id + "' has a band missing from the bank");
    roster_.emplace(p.pupil_id, p.ability_band);
  }

  store_ = std::make_unique<RecordStore>(config_.store_path);
  for (const auto& [pupil_id, band] : roster_) {
    const auto history = session_history(*store_, pupil_id);
    Cached cached{profile_from_history(pupil_id, band, history, config_.session), Timestamp{}};
    if (!history.empty()) cached.last_session_end = history.back().ended_at;
    profiles_.emplace(pupil_id, std::move(cached));
  }
  boot_time_ = clock_();
}

Service::~Service() = default;

HttpResponse Service::handle(const HttpRequest& request) {
  try {
    return route(request);
  } catch (const ApiError& e) {
    return error_response(e);
  } catch (const Error& e) {
    return error_response(api_error(e));
  } catch (const nlohmann::json::exception& e) {
    return error_response({422, "parse", e.what()});
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what()});
  }
}

HttpResponse Service::route(const HttpRequest& request) {
  const auto parts = split_path(request.path);
  const std::string& m = request.method;
  const auto not_found = [&] {
    return ApiError{404, "not_found", "no route for " + m + " " + request.path};
  };

  if (parts.size() == 1 && parts[0] == "healthz" && m == "GET")
    return json_response(200, Json{{"status", "ok"}});
  if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") throw not_found();

  const std::string& resource = parts[2];
  if (resource == "items" && parts.size() == 3 && m == "GET") return get_items(request);
  if (resource == "sessions" && m == "POST") {
    if (parts.size() == 3) return create_session(request);
    if (parts.size() == 5) {
      if (parts[4] == "attempts") return submit_attempt(request, parts[3]);
      if (parts[4] == "launch") return launch(request, parts[3]);
      if (parts[4] == "finish") return finish(request, parts[3]);
      if (parts[4] == "end-firing") return end_firing(request, parts[3]);
    }
  }
  if (resource == "pupils" && parts.size() == 5) {
    if (m == "GET" && parts[4] == "profile") return get_profile(request, parts[3]);
    if (m == "GET" && parts[4] == "records") return get_records(request, parts[3]);
    if (m == "GET" && parts[4] == "flags") return get_flags(request, parts[3]);
    if (m == "POST" && parts[4] == "remarks") return add_remark(request, parts[3]);
  }
  throw not_found();
}

const Principal* Service::authenticate(const HttpRequest& request, const Json* body) const {
  std::string token;
  if (auto it = request.headers.find("authorization"); it != request.headers.end()) {
    std::string_view value = it->second;
    if (value.rfind("Bearer ", 0) == 0) token = std::string(value.substr(7));
  }
  if (token.empty() && body && body->contains("helper_token") && (*body)["helper_token"].is_string())
    token = (*body)["helper_token"].get<std::string>();
  if (token.empty()) return nullptr;
  auto it = principals_.find(token);
  return it == principals_.end() ? nullptr : &it->second;
}

const Principal& Service::require_principal(const HttpRequest& request, const Json* body) const {
  const Principal* p = authenticate(request, body);
  if (!p) throw ApiError{401, "unauthorized", "missing or unknown token"};
  return *p;
}

void Service::require_pupil(const std::string& pupil_id) const {
  if (!roster_.count(pupil_id)) throw ApiError{404, "not_found", "unknown pupil '" + pupil_id + "'"};
}

std::shared_ptr<Service::Live> Service::find_session(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end())
    throw ApiError{404, "not_found", "unknown session '" + session_id + "'"};
  return it->second;
}

namespace {

// Checks role and scope for reads of one pupil's data.
void require_read(const Principal& p, const std::string& pupil_id, bool helper_allowed,
                  bool parent_allowed) {
  switch (p.role) {
    case Role::Teacher: return;
    case Role::Helper:
      if (helper_allowed) return;
      break;
    case Role::Parent:
      if (parent_allowed && p.pupils.count(pupil_id)) return;
      break;
  }
  throw ApiError{403, "forbidden", std::string(to_string(p.role)) + " may not read this resource"};
}

// Session operations belong to the principal that opened the session.
template <typename LiveT>
std::unique_lock<std::mutex> lock_session(LiveT& live, const Principal& p) {
  if (p.role == Role::Parent) throw ApiError{403, "forbidden", "parents may not run sessions"};
  if (p.role != Role::Teacher && p.token != live.owner_token)
    throw ApiError{403, "forbidden", "session belongs to another principal"};
  std::unique_lock lock(live.mutex, std::try_to_lock);
  if (!lock.owns_lock()) throw ApiError{409, "session_busy", "another request is in progress"};
  return lock;
}

}  // namespace

HttpResponse Service::create_session(const HttpRequest& request) {
  const Json body = body_json(request);
  const Principal& p = require_principal(request, &body);
  ObjectReader r(body, "session request", {"pupil_id", "helper_token"});
  const std::string pupil_id = r.string("pupil_id");
  if (p.role == Role::Parent) throw ApiError{403, "forbidden", "parents may not run sessions"};
  require_pupil(pupil_id);

  PupilProfile profile;
  {
    std::lock_guard lock(profiles_mutex_);
    profile = profiles_.at(pupil_id).profile;
  }
  std::unique_lock lock(sessions_mutex_);
  for (const auto& [id, live] : sessions_)
    if (live->pupil_id == pupil_id)
      throw ApiError{409, "session_active", "pupil already has session '" + id + "'"};
  const std::uint64_t n = ++session_counter_;
  const std::string session_id = "s" + std::to_string(boot_time_.ms) + "-" + std::to_string(n);
  SessionContext context{bank_, templates_, config_.game, config_.session, clock_};
  auto live = std::make_shared<Live>(
      p.token, pupil_id,
      LiveSession(std::move(context), std::move(profile), session_id, p.id, mix_seed(config_.seed, n)));
  Json out = game_status(live->session.game());
  out["session_id"] = session_id;
  out["pupil_id"] = pupil_id;
  out["items"] = live->session.on_screen();
  if (const auto* item = live->session.presented()) out["presented_item"] = *item;
  sessions_.emplace(session_id, std::move(live));
  return json_response(201, out);
}

HttpResponse Service::submit_attempt(const HttpRequest& request, const std::string& session_id) {
  const bool multipart = !request.parts.empty();
  const Json body = multipart ? Json::object() : body_json(request);
  const Principal& p = require_principal(request, nullptr);
  auto live = find_session(session_id);
  auto lock = lock_session(*live, p);

  std::string item_id;
  UtteranceInput input;
  bool have_signal = false;
  if (multipart) {
    for (const auto& part : request.parts) {
      if (part.name == "item_id") {
        item_id = part.content;
      } else if (part.name == "gaze_dwell_ms") {
        int v = 0;
        auto [end, ec] = std::from_chars(part.content.data(), part.content.data() + part.content.size(), v);
        if (ec != std::errc() || end != part.content.data() + part.content.size())
          throw ApiError{422, "parse", "gaze_dwell_ms must be an integer"};
        input.gaze_dwell_ms = v;
      } else if (part.name == "audio") {
        if (have_signal) throw ApiError{422, "parse", "give exactly one of audio or features"};
        input.signal = decode_wav(byte_view(part.content));
        have_signal = true;
      } else if (part.name == "features") {
        if (have_signal) throw ApiError{422, "parse", "give exactly one of audio or features"};
        input.signal = decode<FeatureSequence>(parse_json(part.content));
        have_signal = true;
      } else if (part.name == "manual") {
        if (part.content != "true" && part.content != "false")
          throw ApiError{422, "parse", "manual must be true or false"};
        input.manual_correct = part.content == "true";
      } else {
        throw ApiError{422, "parse", "unknown part '" + part.name + "'"};
      }
    }
    if (item_id.empty()) throw ApiError{422, "parse", "missing item_id"};
  } else {
    ObjectReader r(body, "attempt request", {"item_id", "audio", "features", "gaze_dwell_ms", "manual"});
    item_id = r.string("item_id");
    if (r.has("audio") == r.has("features"))
      throw ApiError{422, "parse", "give exactly one of audio or features"};
    if (r.has("audio")) {
      const std::string wav = base64_decode(r.string("audio"));
      input.signal = decode_wav(byte_view(wav));
    }
    else input.signal = decode<FeatureSequence>(r.at("features"));
    have_signal = true;
    if (auto dwell = r.opt_integer("gaze_dwell_ms")) input.gaze_dwell_ms = static_cast<int>(*dwell);
    if (r.has("manual")) input.manual_correct = r.boolean("manual");
  }
  if (!have_signal) throw ApiError{422, "parse", "give exactly one of audio or features"};

  LiveSession& s = live->session;
  const int round_before = s.game().round;
  const Attempt attempt = s.submit(item_id, input);
  Json out = game_status(s.game());
  out["recognition"] = attempt.result;
  out["correct"] = attempt.correct;
  if (attempt.confidence) out["confidence"] = *attempt.confidence;
  out["complete"] = s.complete();
  if (const auto* next = s.presented()) out["next_item"] = *next;
  if (s.game().round != round_before) out["items"] = s.on_screen();
  return json_response(200, out);
}

HttpResponse Service::launch(const HttpRequest& request, const std::string& session_id) {
  const Json body = body_json(request);
  const Principal& p = require_principal(request, nullptr);
  auto live = find_session(session_id);
  auto lock = lock_session(*live, p);
  ObjectReader r(body, "launch request", {"angle_deg", "speed"});
  const double angle = r.number("angle_deg");
  const double speed = r.number("speed");

  LiveSession& s = live->session;
  const int round_before = s.game().round;
  const auto events = s.launch(angle, speed);
  Json out = game_status(s.game());
  out["events"] = events;
  out["complete"] = s.complete();
  if (const auto* next = s.presented()) out["next_item"] = *next;
  if (s.game().round != round_before) out["items"] = s.on_screen();
  return json_response(200, out);
}

HttpResponse Service::end_firing(const HttpRequest& request, const std::string& session_id) {
  const Json body = body_json(request);
  ObjectReader(body, "end-firing request", {});
  const Principal& p = require_principal(request, nullptr);
  auto live = find_session(session_id);
  auto lock = lock_session(*live, p);
  LiveSession& s = live->session;
  const int round_before = s.game().round;
  s.end_firing();
  Json out = game_status(s.game());
  out["complete"] = s.complete();
  if (const auto* next = s.presented()) out["next_item"] = *next;
  if (s.game().round != round_before) out["items"] = s.on_screen();
  return json_response(200, out);
}

HttpResponse Service::finish(const HttpRequest& request, const std::string& session_id) {
  const Json body = body_json(request);
  ObjectReader(body, "finish request", {});
  const Principal& p = require_principal(request, nullptr);
  auto live = find_session(session_id);
  auto lock = lock_session(*live, p);

  SessionRecord record = live->session.finish();
  std::vector<NewEvent> batch;
  batch.push_back(NewEvent{record.pupil_id, record.ended_at, p.id, record});
  for (const auto& flag : record.flags_after)
    batch.push_back(NewEvent{record.pupil_id, record.ended_at, p.id, flag});
  store_->append_batch(std::move(batch));
  {
    std::lock_guard plock(profiles_mutex_);
    profiles_[record.pupil_id] = Cached{live->session.profile(), record.ended_at};
  }
  {
    std::unique_lock slock(sessions_mutex_);
    sessions_.erase(session_id);
  }
  return json_response(200, Json(record));
}

HttpResponse Service::get_profile(const HttpRequest& request, const std::string& pupil_id) {
  const Principal& p = require_principal(request, nullptr);
  require_read(p, pupil_id, true, false);
  require_pupil(pupil_id);
  std::lock_guard lock(profiles_mutex_);
  const Cached& cached = profiles_.at(pupil_id);
  Json out = cached.profile;
  out["progression"] = progression_check(cached.profile, *bank_, config_.session);
  return json_response(200, out);
}

HttpResponse Service::get_records(const HttpRequest& request, const std::string& pupil_id) {
  const Principal& p = require_principal(request, nullptr);
  require_read(p, pupil_id, false, true);
  require_pupil(pupil_id);
  RecordQuery q;
  q.pupil_id = pupil_id;
  q.from = query_time(request, "from", false);
  q.to = query_time(request, "to", true);
  if (auto it = request.query.find("kind"); it != request.query.end() && !it->second.empty()) {
    std::string_view rest = it->second;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto name = rest.substr(0, comma);
      auto kind = parse_event_kind(name);
      if (!kind) throw ApiError{400, "bad_query", "unknown kind '" + std::string(name) + "'"};
      q.kinds.insert(*kind);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  return json_response(200, Json{{"pupil_id", pupil_id}, {"events", store_->query(q)}});
}

HttpResponse Service::get_flags(const HttpRequest& request, const std::string& pupil_id) {
  const Principal& p = require_principal(request, nullptr);
  require_read(p, pupil_id, false, true);
  require_pupil(pupil_id);
  std::lock_guard lock(profiles_mutex_);
  const Cached& cached = profiles_.at(pupil_id);
  const auto flags = generate_flags(cached.profile, config_.session, cached.last_session_end);
  return json_response(200, Json{{"pupil_id", pupil_id}, {"flags", flags}});
}

HttpResponse Service::add_remark(const HttpRequest& request, const std::string& pupil_id) {
  const Json body = body_json(request);
  const Principal& p = require_principal(request, nullptr);
  if (p.role != Role::Teacher) throw ApiError{403, "forbidden", "only teachers may add remarks"};
  require_pupil(pupil_id);
  ObjectReader r(body, "remark request", {"date", "material", "remarks", "author_initials"});
  Remark remark;
  auto date = parse_date(r.string("date"));
  if (!date) throw ApiError{422, "parse", "date must be YYYY-MM-DD"};
  remark.date = *date;
  remark.material = r.string("material");
  remark.remarks = r.string("remarks");
  remark.author_initials = r.opt_string("author_initials");
  const RecordEvent event = store_->append(NewEvent{pupil_id, from_date(remark.date), p.id, remark});
  return json_response(201, Json(event));
}

HttpResponse Service::get_items(const HttpRequest& request) {
  require_principal(request, nullptr);
  std::vector<PhonicsItem> items;
  auto it = request.query.find("band");
  if (it == request.query.end() || it->second.empty()) {
    items = bank_->items();
  } else {
    int band = 0;
    const std::string& text = it->second;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), band);
    if (ec != std::errc() || end != text.data() + text.size())
      throw ApiError{400, "bad_query", "band must be an integer"};
    items = bank_->band_items(band);
  }
  return json_response(200, Json{{"items", items}});
}

}  // namespace vocal
