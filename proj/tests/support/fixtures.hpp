#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vocal/item_bank.hpp"
#include "vocal/records.hpp"
#include "vocal/service.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Six items: band 1 {a, s, t}, band 2 {ch, sh}, band 3 {cat}.
vocal::ItemBank small_bank();

/// The four dated rows of the handwritten reading record, as CSV with a header.
std::string legacy_sample_csv();

struct LegacySampleRow {
  int year;
  unsigned month;
  unsigned day;
  bool inferred;
  std::string material;
  std::string remarks;
};
/// Expected parse of legacy_sample_csv() with default year 2012.
std::vector<LegacySampleRow> legacy_sample_rows();

/// Random valid event for one of `pupils`; bodies cycle through every kind.
vocal::NewEvent random_event(std::mt19937_64& rng, const std::vector<std::string>& pupils);

/// Service config over the default bank: pupils p1, p2, p3 in band 1 and
/// tokens "teacher", "helper", "parent" (scope: p1).
vocal::ServiceConfig service_config(const std::filesystem::path& store);

/// JSON request with an optional bearer token; body is sent only when non-null.
vocal::HttpRequest api_request(const std::string& method, const std::string& path,
                               const std::string& token, const vocal::Json& body = nullptr);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};
/// Runs a shell command and waits for it.
CommandResult run_command(const std::string& command);
/// Single-quotes a path or argument for the shell.
std::string shell_quote(const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace fixture
