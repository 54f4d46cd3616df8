// vocal: administrative and simulation command-line tool.
//
// Exit status: 0 success, 1 domain failure, 2 usage error.

#include <httplib.h>
#include <signal.h>

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "vocal/audio.hpp"
#include "vocal/codec.hpp"
#include "vocal/error.hpp"
#include "vocal/item_bank.hpp"
#include "vocal/legacy.hpp"
#include "vocal/recognizer.hpp"
#include "vocal/records.hpp"
#include "vocal/service.hpp"
#include "vocal/session.hpp"
#include "vocal/simulation.hpp"

namespace fs = std::filesystem;
using namespace vocal;

namespace {

constexpr int kFailure = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Storage, "cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error(ErrorCode::Storage, "cannot write " + path.string());
}

int current_year() {
  const auto today = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
  return static_cast<int>(std::chrono::year_month_day(today).year());
}

// ---------------------------------------------------------------------------

int cmd_serve(const fs::path& config_path) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceConfig config = load_service_config(config_path);
  Service service(config);
  HttpServer server(service);
  const int port = server.bind(config.listen_address, config.port);
  std::cout << "listening on " << config.listen_address << ":" << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // run() also returns when the listener fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "stopped" << std::endl;
  return 0;
}

int cmd_bank_validate(const fs::path& path) {
  const std::string source = read_file(path);
  const auto findings = bank_findings(source);
  if (!findings.empty()) {
    std::cout << path.string() << ": " << findings.size() << " problem(s)\n";
    for (const auto& f : findings) std::cout << "  " << f << "\n";
    return kFailure;
  }
  const ItemBank bank = load_bank(source);
  std::cout << path.string() << ": ok, " << bank.items().size() << " items in " << bank.bands().size()
            << " bands\n";
  for (int band : bank.bands())
    std::cout << "  band " << band << ": " << bank.band_items(band).size() << " items\n";
  return 0;
}

int cmd_bank_default(const std::optional<fs::path>& out) {
  const std::string text = serialize_bank(default_bank());
  if (out) write_file(*out, text);
  else std::cout << text;
  return 0;
}

int cmd_build_templates(const fs::path& bank_path, const fs::path& out_dir,
                        const std::optional<fs::path>& audio_dir) {
  const ItemBank bank = load_bank_file(bank_path);
  TemplateSet templates;
  if (audio_dir) {
    for (const auto& item : bank.items()) {
      const fs::path wav = *audio_dir / (item.item_id + ".wav");
      try {
        templates.insert(Template{item.item_id, extract_features(read_wav_file(wav))});
      } catch (const Error& e) {
        throw e.with_context(wav.string());
      }
    }
  } else {
    templates = synth_templates(bank);
  }
  fs::create_directories(out_dir);
  const fs::path out = out_dir / "templates.jsonl";
  write_file(out, templates_to_jsonl(templates));
  std::cout << "wrote " << templates.size() << " templates to " << out.string() << "\n";
  return 0;
}

// --- simulate --------------------------------------------------------------

class ApiClient {
 public:
  ApiClient(int port, std::string token) : client_("127.0.0.1", port), token_(std::move(token)) {
    client_.set_read_timeout(60, 0);
  }

  Json post(const std::string& path, const Json& body) {
    auto res = client_.Post(path, headers(), body.dump(), "application/json");
    return check(res, "POST " + path);
  }

  Json get(const std::string& path) {
    auto res = client_.Get(path, headers());
    return check(res, "GET " + path);
  }

 private:
  httplib::Headers headers() const { return {{"Authorization", "Bearer " + token_}}; }

  static Json check(const httplib::Result& res, const std::string& what) {
    if (!res) throw Error(ErrorCode::Storage, what + ": " + httplib::to_string(res.error()));
    if (res->status / 100 != 2)
      throw Error(ErrorCode::Conflict, what + ": HTTP " + std::to_string(res->status) + " " + res->body);
    return parse_json(res->body);
  }

  httplib::Client client_;
  std::string token_;
};

std::optional<PhonicsItem> presented_in(const Json& response) {
  for (const char* key : {"next_item", "presented_item"})
    if (response.contains(key)) return decode<PhonicsItem>(response.at(key));
  return std::nullopt;
}

// Same pupils and policies as the in-process simulator, driven over HTTP.
ClassReport simulate_via_http(const SimulationSpec& spec, const ItemBank& bank) {
  spec.validate();
  const fs::path store = spec.store_path.value_or(
      fs::temp_directory_path() / ("vocal-sim-http-" + std::to_string(::getpid()) + ".log"));
  struct Cleanup {
    fs::path path;
    bool active;
    ~Cleanup() {
      std::error_code ec;
      if (active) fs::remove(path, ec);
    }
  } cleanup{store, !spec.store_path};

  ServiceConfig config;
  config.store_path = store;
  config.seed = spec.seed;
  config.game = spec.game;
  config.session = spec.session;
  config.session.items_per_session = spec.items_per_session;
  config.principals = {Principal{"sim-helper-token", Role::Helper, "sim-helper", {}},
                       Principal{"sim-teacher-token", Role::Teacher, "sim-teacher", {}}};
  std::vector<SimulatedPupil> pupils;
  for (int p = 0; p < spec.pupil_count; ++p) {
    pupils.push_back(simulated_pupil(spec, p));
    config.pupils.push_back(PupilEntry{pupils.back().pupil_id, bank.bands().front()});
  }
  const fs::path bank_file = store.string() + ".bank.jsonl";
  write_file(bank_file, serialize_bank(bank));
  Cleanup bank_cleanup{bank_file, true};
  config.bank_path = bank_file;

  Service service(config, stepping_clock(Timestamp{kSimulationEpochMs}, 1000));
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.run(); });
  struct Stop {
    HttpServer& server;
    std::thread& thread;
    ~Stop() {
      server.stop();
      thread.join();
    }
  } stop{server, thread};

  ApiClient helper(port, "sim-helper-token");
  ApiClient teacher(port, "sim-teacher-token");
  for (const auto& pupil : pupils) {
    for (int s = 0; s < spec.sessions_per_pupil; ++s) {
      const SessionInputs inputs = pupil.session_inputs(s);
      Json state = helper.post("/api/v1/sessions", Json{{"pupil_id", pupil.pupil_id}});
      const std::string base = "/api/v1/sessions/" + state.at("session_id").get<std::string>();
      std::size_t position = 0;
      while (!state.value("complete", false) && state.at("phase") != "Over") {
        if (auto item = presented_in(state)) {
          const UtteranceInput u = inputs.utterance_for(*item, position++);
          const auto wav = encode_wav(std::get<AudioClip>(u.signal));
          Json body{{"item_id", item->item_id},
                    {"audio", base64_encode({reinterpret_cast<const char*>(wav.data()), wav.size()})}};
          if (u.gaze_dwell_ms) body["gaze_dwell_ms"] = *u.gaze_dwell_ms;
          state = helper.post(base + "/attempts", body);
        } else if (state.at("phase") == "Firing") {
          GameState game;
          game.config = spec.game;
          game.power = state.at("power").get<double>();
          game.round = state.at("round").get<int>();
          if (auto command = inputs.next_launch(game))
            state = helper.post(base + "/launch",
                                Json{{"angle_deg", command->angle_deg}, {"speed", command->speed}});
          else
            state = helper.post(base + "/end-firing", Json::object());
        } else {
          break;
        }
      }
      helper.post(base + "/finish", Json::object());
    }
  }

  ClassReport report;
  report.seed = spec.seed;
  report.sessions_per_pupil = spec.sessions_per_pupil;
  report.items_per_session = spec.items_per_session;
  for (const auto& pupil : pupils) {
    const Json records =
        teacher.get("/api/v1/pupils/" + pupil.pupil_id + "/records?kind=SessionCompleted");
    std::vector<SessionRecord> history;
    for (const auto& event : records.at("events"))
      history.push_back(decode<SessionRecord>(event.at("body")));
    report.pupils.push_back(
        summarize_pupil(pupil, bank.bands().front(), history, config.session));
  }
  return report;
}

int cmd_simulate(const SimulationSpec& spec, const std::optional<fs::path>& out, bool via_http) {
  const auto t0 = std::chrono::steady_clock::now();
  const ClassReport report = via_http ? simulate_via_http(spec, default_bank())
                                      : run_simulation(spec, default_bank());
  const std::string text = format_report(report);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out) {
    write_file(*out, text);
    std::cerr << "simulated " << report.pupils.size() << " pupils in " << secs << " s; report: "
              << out->string() << "\n";
  } else {
    std::cout << text;
  }
  return 0;
}

// --- records ---------------------------------------------------------------

int cmd_report(const std::string& pupil_id, const fs::path& store_path, int band) {
  if (!fs::exists(store_path)) throw Error(ErrorCode::NotFound, "no store at " + store_path.string());
  RecordStore store(store_path);
  RecordQuery q;
  q.pupil_id = pupil_id;
  const auto events = store.query(q);
  if (events.empty()) throw Error(ErrorCode::NotFound, "no records for pupil '" + pupil_id + "'");

  SessionConfig config;
  std::vector<SessionRecord> sessions;
  std::vector<Remark> remarks;
  for (const auto& e : events) {
    if (const auto* s = std::get_if<SessionRecord>(&e.body)) sessions.push_back(*s);
    if (const auto* r = std::get_if<Remark>(&e.body)) remarks.push_back(*r);
  }
  const PupilProfile profile = profile_from_history(pupil_id, band, sessions, config);
  const Timestamp last = sessions.empty() ? Timestamp{} : sessions.back().ended_at;
  const auto flags = generate_flags(profile, config, last);

  std::cout << "pupil: " << pupil_id << "\n";
  std::cout << "ability band: " << profile.ability_band << "\n";
  std::cout << "events: " << events.size() << "\n\n";
  std::cout << "sessions: " << sessions.size() << "\n";
  for (const auto& s : sessions) {
    int correct = 0;
    for (const auto& a : s.attempts) correct += a.correct ? 1 : 0;
    std::cout << "  " << format_timestamp(s.started_at) << "  " << s.session_id << "  band "
              << s.ability_band << "  " << correct << "/" << s.attempts.size() << " correct  score "
              << s.final_score << (s.progression.ready ? "  ready to progress" : "") << "\n";
  }
  std::cout << "\nflags: " << flags.size() << "\n";
  for (const auto& f : flags)
    std::cout << "  " << f.priority_rank << ". " << f.item_id << "  proficiency " << f.proficiency
              << "  attempts " << f.attempts << "\n";
  std::cout << "\nremarks: " << remarks.size() << "\n";
  for (const auto& r : remarks) {
    std::cout << "  " << format_date(r.date) << (r.date_inferred ? "*" : "") << "  " << r.material
              << "  " << r.remarks;
    if (r.author_initials) std::cout << "  (" << *r.author_initials << ")";
    std::cout << "\n";
  }
  return 0;
}

int cmd_import_legacy(const fs::path& table, const std::string& pupil_id, const fs::path& store_path,
                      int default_year, const std::string& author, bool strict) {
  const LegacyImport import = import_legacy(read_file(table), default_year);
  std::size_t bad = 0;
  std::cout << "line  outcome\n";
  for (const auto& row : import.rows) {
    bad += row.ok ? 0 : 1;
    std::cout << std::setw(4) << row.line << "  " << (row.ok ? "" : "error: ") << row.message << "\n";
  }
  if (strict && bad > 0) {
    std::cerr << bad << " bad row(s); nothing imported\n";
    return kFailure;
  }
  RecordStore store(store_path);
  const auto written = store.append_batch(remark_events(import, pupil_id, author));
  std::cout << "imported " << written.size() << " remark(s) for " << pupil_id;
  if (bad > 0) std::cout << ", skipped " << bad << " bad row(s)";
  std::cout << "\n";
  return bad > 0 ? kFailure : 0;
}

int cmd_export(const std::string& pupil_id, const fs::path& store_path,
               const std::optional<fs::path>& out) {
  RecordStore store(store_path);
  const std::string archive = store.export_archive(pupil_id);
  if (out) write_file(*out, archive);
  else std::cout << archive;
  return 0;
}

int cmd_verify_archive(const fs::path& archive) {
  const auto events = import_archive(read_file(archive));
  std::cout << archive.string() << ": ok, " << events.size() << " events\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vocal: phonics reading assessment tools"};
  app.require_subcommand(1);

  fs::path config_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API until interrupted");
  serve->add_option("--config", config_path, "Service config JSON")->required();

  auto* bank = app.add_subcommand("bank", "Item bank utilities");
  bank->require_subcommand(1);
  fs::path bank_path;
  auto* validate = bank->add_subcommand("validate", "Check a bank file and report findings");
  validate->add_option("path", bank_path, "Bank JSONL file")->required();
  fs::path templates_out;
  std::optional<fs::path> audio_dir;
  auto* build = bank->add_subcommand("build-templates", "Write templates.jsonl for a bank");
  build->add_option("bank", bank_path, "Bank JSONL file")->required();
  build->add_option("--out", templates_out, "Output directory")->required();
  build->add_option("--from-audio", audio_dir, "Directory of <item_id>.wav recordings");
  std::optional<fs::path> default_out;
  auto* dflt = bank->add_subcommand("default", "Print the built-in bank as JSONL");
  dflt->add_option("--out", default_out, "Write to a file instead of stdout");

  SimulationSpec spec;
  std::optional<fs::path> report_out;
  std::optional<fs::path> sim_store;
  bool via_http = false;
  auto* simulate = app.add_subcommand("simulate", "Simulate a class of pupils");
  simulate->add_option("--pupils", spec.pupil_count, "Number of pupils")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  simulate->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  simulate->add_option("--sessions", spec.sessions_per_pupil, "Sessions per pupil")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  simulate->add_option("--items", spec.items_per_session, "Items per session")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  simulate->add_option("--out", report_out, "Report file (default: stdout)");
  simulate->add_option("--store", sim_store, "Keep the event log at this path");
  simulate->add_flag("--via-http", via_http, "Drive the sessions through the HTTP service");

  std::string pupil_id;
  fs::path store_path;
  int band = 1;
  auto* report = app.add_subcommand("report", "Print one pupil's records, flags and remarks");
  report->add_option("--pupil", pupil_id, "Pupil id")->required();
  report->add_option("--store", store_path, "Event log")->required();
  report->add_option("--band", band, "Starting ability band")->check(CLI::PositiveNumber)->capture_default_str();

  fs::path table_path;
  int default_year = current_year();
  std::string author = "legacy-import";
  bool strict = false;
  auto* legacy = app.add_subcommand("import-legacy", "Import a handwritten reading record (CSV/TSV)");
  legacy->add_option("table", table_path, "Table with header date,material,remarks[,initials]")->required();
  legacy->add_option("--pupil", pupil_id, "Pupil id")->required();
  legacy->add_option("--store", store_path, "Event log")->required();
  legacy->add_option("--default-year", default_year, "Year for dates written as d/m")->capture_default_str();
  legacy->add_option("--author", author, "Author recorded on the events")->capture_default_str();
  legacy->add_flag("--strict", strict, "Import nothing if any row is bad");

  auto* records = app.add_subcommand("records", "Archive export and verification");
  records->require_subcommand(1);
  std::optional<fs::path> archive_out;
  auto* exp = records->add_subcommand("export", "Write a pupil's archive");
  exp->add_option("--pupil", pupil_id, "Pupil id")->required();
  exp->add_option("--store", store_path, "Event log")->required();
  exp->add_option("--out", archive_out, "Archive file (default: stdout)");
  fs::path archive_path;
  auto* verify = records->add_subcommand("verify", "Check an archive's integrity");
  verify->add_option("archive", archive_path, "Archive file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*serve) return cmd_serve(config_path);
    if (*validate) return cmd_bank_validate(bank_path);
    if (*build) return cmd_build_templates(bank_path, templates_out, audio_dir);
    if (*dflt) return cmd_bank_default(default_out);
    if (*simulate) {
      spec.store_path = sim_store;
      return cmd_simulate(spec, report_out, via_http);
    }
    if (*report) return cmd_report(pupil_id, store_path, band);
    if (*legacy) return cmd_import_legacy(table_path, pupil_id, store_path, default_year, author, strict);
    if (*exp) return cmd_export(pupil_id, store_path, archive_out);
    if (*verify) return cmd_verify_archive(archive_path);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return 2;
}
