#include "fixtures.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vocal/error.hpp"

namespace fixture {

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "vocal-test-XXXXXX").string();
  if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

vocal::ItemBank small_bank() {
  using vocal::ItemKind;
  return vocal::ItemBank::from_items({
      {"a", "a", ItemKind::Letter, 1},
      {"s", "s", ItemKind::Letter, 1},
      {"t", "t", ItemKind::Letter, 1},
      {"ch", "ch", ItemKind::Phoneme, 2},
      {"sh", "sh", ItemKind::Phoneme, 2},
      {"cat", "cat", ItemKind::Word, 3},
  });
}

std::string legacy_sample_csv() {
  return "date,material,remarks\n"
         "17/6/12,The new baby,Well done Megan. Read to P12.\n"
         "19/6,Vocabulary custom,Read this without any problems. Well done SE\n"
         "20/6,Etchers,Enjoy. Excellent. Sanding out and using pictures is a help. Megan well to English.\n"
         "27/6/12,Masha and the incredible bird,Excellent reading. Mustafa\n";
}

std::vector<LegacySampleRow> legacy_sample_rows() {
  return {
      {2012, 6, 17, false, "The new baby", "Well done Megan. Read to P12."},
      {2012, 6, 19, true, "Vocabulary custom", "Read this without any problems. Well done SE"},
      {2012, 6, 20, true, "Etchers",
       "Enjoy. Excellent. Sanding out and using pictures is a help. Megan well to English."},
      {2012, 6, 27, false, "Masha and the incredible bird", "Excellent reading. Mustafa"},
  };
}

vocal::NewEvent random_event(std::mt19937_64& rng, const std::vector<std::string>& pupils) {
  using namespace vocal;
  std::uniform_int_distribution<std::size_t> pick(0, pupils.size() - 1);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> ms(1'700'000'000'000, 1'800'000'000'000);
  const std::string pupil = pupils[pick(rng)];
  const Timestamp at{ms(rng)};
  const std::string item = "w" + std::to_string(rng() % 40);

  Attempt attempt;
  attempt.session_id = "s" + std::to_string(rng() % 1000);
  attempt.item_id = item;
  attempt.presented_at = at;
  attempt.result.best_score = unit(rng) * 2.0 - 1.0;
  attempt.result.per_candidate_scores = {{item, attempt.result.best_score}, {"zz", unit(rng)}};
  if (attempt.result.best_score > 0.3) attempt.result.accepted_item = item;
  attempt.correct = attempt.result.accepted_item.has_value();
  if (rng() % 2) attempt.gaze_dwell_ms = static_cast<int>(rng() % 6000);
  if (rng() % 2) attempt.confidence = unit(rng);

  switch (kind(rng)) {
    case 0: {
      SessionRecord r;
      r.session_id = attempt.session_id;
      r.pupil_id = pupil;
      r.helper_id = "helper";
      r.started_at = at;
      r.ended_at = Timestamp{at.ms + 60'000};
      r.attempts = {attempt};
      r.game_events = {GameEvent{0, PowerGained{10.0}}, GameEvent{3, BubbleLaunched{1, 80.0, 10.0}},
                       GameEvent{40, NativeCaptured{2, 1}}};
      r.final_score = 100;
      r.progression = Progression{false, 1};
      return NewEvent{pupil, r.ended_at, "helper", r};
    }
    case 1: return NewEvent{pupil, at, "helper", attempt};
    case 2: {
      Flag f{pupil, item, unit(rng) * 0.5, 3 + static_cast<int>(rng() % 5),
             1 + static_cast<int>(rng() % 4), at};
      return NewEvent{pupil, at, "teacher", f};
    }
    default: {
      Remark r;
      r.date = to_date(at);
      r.material = "Book " + std::to_string(rng() % 50) + ", p" + std::to_string(rng() % 90);
      r.remarks = "Read \"well\", with expression;\tnew line\nnext " + std::to_string(rng() % 100);
      if (rng() % 2) r.author_initials = "SE";
      return NewEvent{pupil, from_date(r.date), "teacher", r};
    }
  }
}

vocal::ServiceConfig service_config(const std::filesystem::path& store) {
  using namespace vocal;
  ServiceConfig c;
  c.store_path = store;
  c.seed = 7;
  c.principals = {Principal{"teacher", Role::Teacher, "t-1", {}},
                  Principal{"helper", Role::Helper, "h-1", {}},
                  Principal{"parent", Role::Parent, "parent-1", {"p1"}}};
  c.pupils = {PupilEntry{"p1", 1}, PupilEntry{"p2", 1}, PupilEntry{"p3", 1}};
  return c;
}

vocal::HttpRequest api_request(const std::string& method, const std::string& path,
                               const std::string& token, const vocal::Json& body) {
  vocal::HttpRequest r;
  r.method = method;
  r.path = path;
  if (!token.empty()) r.headers["authorization"] = "Bearer " + token;
  if (!body.is_null()) r.body = body.dump();
  return r;
}

CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixture
