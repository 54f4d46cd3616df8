#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vocal/assessment.hpp"
#include "vocal/codec.hpp"
#include "vocal/session.hpp"
#include "vocal/time.hpp"

namespace vocal {

/// One row of a reading record: date, book/page and free-text remarks.
struct Remark {
  std::chrono::year_month_day date;
  std::string material;
  std::string remarks;
  std::optional<std::string> author_initials;
  /// The year was missing in the source and filled in from a default.
  bool date_inferred = false;

  bool operator==(const Remark&) const = default;
};

enum class EventKind { SessionCompleted, AttemptLogged, FlagRaised, RemarkAdded };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

using EventBody = std::variant<SessionRecord, Attempt, Flag, Remark>;

struct NewEvent {
  std::string pupil_id;
  Timestamp at;
  std::string author;
  EventBody body;
};

struct RecordEvent {
  std::uint64_t event_id = 0;
  std::string pupil_id;
  Timestamp at;
  std::string author;
  EventBody body;

  EventKind kind() const noexcept { return static_cast<EventKind>(body.index()); }
  bool operator==(const RecordEvent&) const = default;
};

struct RecordQuery {
  std::string pupil_id;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // inclusive
  std::set<EventKind> kinds;      // empty = all kinds
};

void to_json(Json& j, const Remark& v);
void from_json(const Json& j, Remark& v);
/// {"event_id", "pupil_id", "at", "author", "kind", "body"}.
void to_json(Json& j, const RecordEvent& v);

/// Throws Error{Validation} for malformed event bodies.
void validate_event(const NewEvent& event);

/// Log line: "<event_id> <crc32 hex> <payload json>\n"; the checksum covers
/// "<event_id> <payload json>".
std::string encode_event_line(const RecordEvent& event);
/// Parses one line without its newline; throws Error{Storage} on damage.
RecordEvent decode_event_line(std::string_view line);

/// Append-only, file-backed event log.
///
/// Appends are serialised and fsync'd before returning; readers see a
/// consistent prefix. On open every line is verified; a torn final line (no
/// trailing newline) from an interrupted write is discarded, any other
/// damage raises Error{Storage}.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);
  ~RecordStore();
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  RecordEvent append(NewEvent event);
  /// All-or-none: either every event becomes visible or none does.
  std::vector<RecordEvent> append_batch(std::vector<NewEvent> events);

  std::vector<RecordEvent> query(const RecordQuery& query) const;
  std::vector<RecordEvent> events() const;
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Hash of the on-disk log bytes.
  std::string digest() const;

  /// Portable archive of one pupil's events.
  std::string export_archive(std::string_view pupil_id) const;

 private:
  struct Entry {
    RecordEvent event;
    std::string line;
  };

  void load();
  void write_all(const std::string& bytes);

  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::shared_mutex mutex_;
  std::vector<Entry> entries_;
};

/// Verifies and decodes an archive; throws Error{CorruptArchive} on any
/// integrity failure.
std::vector<RecordEvent> import_archive(std::string_view archive);

/// Session records of one pupil in log order.
std::vector<SessionRecord> session_history(const RecordStore& store, const std::string& pupil_id);

}  // namespace vocal
