#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "vocal/assessment.hpp"
#include "vocal/codec.hpp"
#include "vocal/game.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/records.hpp"
#include "vocal/session.hpp"
#include "vocal/time.hpp"

namespace vocal {

enum class Role { Teacher, Helper, Parent };

std::string_view to_string(Role role) noexcept;

struct Principal {
  std::string token;
  Role role = Role::Helper;
  /// Author id recorded on events written by this principal.
  std::string id;
  /// Parent only: children this token may read.
  std::set<std::string> pupils;
};

struct PupilEntry {
  std::string pupil_id;
  int ability_band = 1;
};

struct ServiceConfig {
  std::string listen_address = "127.0.0.1";
  int port = 8080;
  /// Empty: built-in default bank.
  std::filesystem::path bank_path;
  std::filesystem::path store_path = "records.log";
  /// Template JSONL file; templates are synthesised from the bank when unset.
  std::optional<std::filesystem::path> templates_path;
  std::uint64_t seed = 1;
  std::vector<Principal> principals;
  std::vector<PupilEntry> pupils;
  GameConfig game;
  SessionConfig session;

  /// Relative paths are resolved against base_dir. Throws Error{InvalidConfig}.
  static ServiceConfig from_json(const Json& j, const std::filesystem::path& base_dir);
};

/// Reads a config file and applies the VOCAL_PORT environment override.
ServiceConfig load_service_config(const std::filesystem::path& path);

struct MultipartPart {
  std::string name;
  std::string filename;
  std::string content_type;
  std::string content;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  /// Lower-case header names.
  std::map<std::string, std::string> headers;
  std::string body;
  std::vector<MultipartPart> parts;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Transport-independent request handler for the /api/v1 surface.
///
/// Role rules: Teacher may do everything; Helper runs sessions and reads
/// profiles; Parent reads records and flags of its own children only.
/// Requests within one session are serialised; a concurrent request for a
/// busy session is answered with 409.
class Service {
 public:
  explicit Service(ServiceConfig config, Clock clock = system_clock());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& request);

  const ServiceConfig& config() const noexcept { return config_; }
  const RecordStore& store() const noexcept { return *store_; }
  const ItemBank& bank() const noexcept { return *bank_; }

 private:
  struct Live;
  struct Cached {
    PupilProfile profile;
    Timestamp last_session_end;
  };

  HttpResponse route(const HttpRequest& request);
  const Principal* authenticate(const HttpRequest& request, const Json* body) const;
  const Principal& require_principal(const HttpRequest& request, const Json* body) const;

  HttpResponse create_session(const HttpRequest& request);
  HttpResponse submit_attempt(const HttpRequest& request, const std::string& session_id);
  HttpResponse launch(const HttpRequest& request, const std::string& session_id);
  HttpResponse end_firing(const HttpRequest& request, const std::string& session_id);
  HttpResponse finish(const HttpRequest& request, const std::string& session_id);
  HttpResponse get_profile(const HttpRequest& request, const std::string& pupil_id);
  HttpResponse get_records(const HttpRequest& request, const std::string& pupil_id);
  HttpResponse get_flags(const HttpRequest& request, const std::string& pupil_id);
  HttpResponse add_remark(const HttpRequest& request, const std::string& pupil_id);
  HttpResponse get_items(const HttpRequest& request);

  std::shared_ptr<Live> find_session(const std::string& session_id) const;
  void require_pupil(const std::string& pupil_id) const;

  ServiceConfig config_;
  Clock clock_;
  std::shared_ptr<const ItemBank> bank_;
  std::shared_ptr<const TemplateSet> templates_;
  std::unique_ptr<RecordStore> store_;
  std::map<std::string, Principal, std::less<>> principals_;
  std::map<std::string, int, std::less<>> roster_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::uint64_t session_counter_ = 0;
  Timestamp boot_time_;

  mutable std::mutex profiles_mutex_;
  std::map<std::string, Cached> profiles_;
};

/// cpp-httplib transport for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::string_view bytes);
/// Throws Error{Parse} on invalid input.
std::string base64_decode(std::string_view text);

}  // namespace vocal
