#include "vocal/records.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vocal/codec.hpp"
#include "vocal/error.hpp"

namespace vocal {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::SessionCompleted: return "SessionCompleted";
    case EventKind::AttemptLogged: return "AttemptLogged";
    case EventKind::FlagRaised: return "FlagRaised";
    case EventKind::RemarkAdded: return "RemarkAdded";
  }
  return "RemarkAdded";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (auto kind : {EventKind::SessionCompleted, EventKind::AttemptLogged, EventKind::FlagRaised,
                    EventKind::RemarkAdded})
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

void to_json(Json& j, const Remark& r) {
  j = Json{{"date", format_date(r.date)},
         {"material", r.material},
         {"remarks", r.remarks},
         {"date_inferred", r.date_inferred}};
  if (r.author_initials) j["author_initials"] = *r.author_initials;
}

void from_json(const Json& j, Remark& remark) {
  ObjectReader r(j, "remark", {"date", "material", "remarks", "author_initials", "date_inferred"});
  auto date = parse_date(r.string("date"));
  if (!date) throw Error(ErrorCode::Parse, "remark: bad date");
  remark.date = *date;
  remark.material = r.string("material");
  remark.remarks = r.string("remarks");
  remark.author_initials = r.opt_string("author_initials");
  remark.date_inferred = r.boolean("date_inferred");
}

void to_json(Json& j, const RecordEvent& e) {
  j = Json{{"event_id", e.event_id},
           {"pupil_id", e.pupil_id},
           {"at", e.at},
           {"author", e.author},
           {"kind", to_string(e.kind())}};
  std::visit([&](const auto& b) { j["body"] = b; }, e.body);
}

namespace {

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large inputs.
  while (!bytes.empty()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), n);
    bytes.remove_prefix(n);
  }
  return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

EventBody body_from_json(EventKind kind, const Json& j) {
  switch (kind) {
    case EventKind::SessionCompleted: return decode<SessionRecord>(j);
    case EventKind::AttemptLogged: return decode<Attempt>(j);
    case EventKind::FlagRaised: return decode<Flag>(j);
    case EventKind::RemarkAdded: return decode<Remark>(j);
  }
  throw Error(ErrorCode::Parse, "unknown event kind");
}

std::string payload_of(const RecordEvent& e) {
  Json j{{"pupil_id", e.pupil_id},
         {"at", e.at},
         {"author", e.author},
         {"kind", to_string(e.kind())},
         };
  std::visit([&](const auto& b) { j["body"] = b; }, e.body);
  return j.dump();
}

std::size_t count_captures(const std::vector<GameEvent>& events) {
  std::size_t n = 0;
  for (const auto& e : events) n += std::holds_alternative<NativeCaptured>(e.payload) ? 1 : 0;
  return n;
}

}  // namespace

void validate_event(const NewEvent& event) {
  if (event.pupil_id.empty()) throw Error(ErrorCode::Validation, "event without pupil_id");
  if (event.author.empty()) throw Error(ErrorCode::Validation, "event without author");
  std::visit(
      [&event](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SessionRecord>) {
          if (b.pupil_id != event.pupil_id)
            throw Error(ErrorCode::Validation, "session record belongs to another pupil");
          if (b.attempts.empty())
            throw Error(ErrorCode::Validation, "completed session has no attempts");
          if (static_cast<std::size_t>(b.final_score) !=
              count_captures(b.game_events) * static_cast<std::size_t>(kPointsPerCapture))
            throw Error(ErrorCode::Validation, "final score disagrees with capture events");
        } else if constexpr (std::is_same_v<T, Attempt>) {
          if (b.item_id.empty()) throw Error(ErrorCode::Validation, "attempt without item_id");
        } else if constexpr (std::is_same_v<T, Flag>) {
          if (b.pupil_id != event.pupil_id)
            throw Error(ErrorCode::Validation, "flag belongs to another pupil");
          if (b.priority_rank < 1) throw Error(ErrorCode::Validation, "flag rank must be >= 1");
        } else {
          if (b.remarks.empty()) throw Error(ErrorCode::Validation, "remark text is empty");
          if (!b.date.ok()) throw Error(ErrorCode::Validation, "remark date is invalid");
        }
      },
      event.body);
}

std::string encode_event_line(const RecordEvent& event) {
  const std::string payload = payload_of(event);
  const std::string id = std::to_string(event.event_id);
  return id + ' ' + hex32(crc32_of(id + ' ' + payload)) + ' ' + payload + '\n';
}

RecordEvent decode_event_line(std::string_view line) {
  const auto sp1 = line.find(' ');
  const auto sp2 = sp1 == std::string_view::npos ? sp1 : line.find(' ', sp1 + 1);
  if (sp2 == std::string_view::npos || sp2 - sp1 != 9)
    throw Error(ErrorCode::Storage, "malformed record line");
  const std::string_view id_text = line.substr(0, sp1);
  const std::string_view crc_text = line.substr(sp1 + 1, 8);
  const std::string_view payload = line.substr(sp2 + 1);

  std::uint64_t id = 0;
  auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
  if (ec != std::errc{} || p != id_text.data() + id_text.size() || id == 0)
    throw Error(ErrorCode::Storage, "malformed event id");
  std::string joined(id_text);
  joined += ' ';
  joined += payload;
  if (hex32(crc32_of(joined)) != crc_text)
    throw Error(ErrorCode::Storage, "checksum mismatch on event " + std::string(id_text));

  try {
    const Json j = parse_json(payload);
    ObjectReader r(j, "event", {"pupil_id", "at", "author", "kind", "body"});
    auto kind = parse_event_kind(r.string("kind"));
    if (!kind) throw Error(ErrorCode::Parse, "unknown event kind");
    RecordEvent event;
    event.event_id = id;
    event.pupil_id = r.string("pupil_id");
    event.at = r.timestamp("at");
    event.author = r.string("author");
    event.body = body_from_json(*kind, r.at("body"));
    return event;
  } catch (const Error& e) {
    throw Error(ErrorCode::Storage, "event " + std::string(id_text) + ": " + e.what());
  }
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0)
    throw Error(ErrorCode::Storage, "cannot open store " + path_.string() + ": " + std::strerror(errno));
  try {
    load();
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

RecordStore::~RecordStore() {
  if (fd_ >= 0) ::close(fd_);
}

void RecordStore::load() {
  std::ifstream in(path_, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();

  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    std::string_view line(bytes.data() + pos, nl - pos);
    RecordEvent event = decode_event_line(line);
    if (event.event_id != entries_.size() + 1)
      throw Error(ErrorCode::Storage, "event id sequence broken at " + std::to_string(event.event_id));
    entries_.push_back(Entry{std::move(event), std::string(line) + '\n'});
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < bytes.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0)
      throw Error(ErrorCode::Storage, "cannot drop torn tail of " + path_.string());
  }
}

void RecordStore::write_all(const std::string& bytes) {
  struct stat st{};
  if (::fstat(fd_, &st) != 0) throw Error(ErrorCode::Storage, "cannot stat store");
  const off_t before = st.st_size;
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string reason = std::strerror(errno);
      [[maybe_unused]] int rc = ::ftruncate(fd_, before);
      throw Error(ErrorCode::Storage, "write failed: " + reason);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    [[maybe_unused]] int rc = ::ftruncate(fd_, before);
    throw Error(ErrorCode::Storage, "fsync failed");
  }
}

RecordEvent RecordStore::append(NewEvent event) {
  std::vector<NewEvent> one;
  one.push_back(std::move(event));
  return append_batch(std::move(one)).front();
}

std::vector<RecordEvent> RecordStore::append_batch(std::vector<NewEvent> events) {
  for (const auto& e : events) validate_event(e);
  std::unique_lock lock(mutex_);
  std::vector<Entry> pending;
  std::string bytes;
  std::uint64_t next_id = entries_.size() + 1;
  for (auto& e : events) {
    RecordEvent event{next_id++, std::move(e.pupil_id), e.at, std::move(e.author), std::move(e.body)};
    std::string line = encode_event_line(event);
    bytes += line;
    pending.push_back(Entry{std::move(event), std::move(line)});
  }
  write_all(bytes);
  std::vector<RecordEvent> out;
  for (auto& entry : pending) {
    out.push_back(entry.event);
    entries_.push_back(std::move(entry));
  }
  return out;
}

std::vector<RecordEvent> RecordStore::query(const RecordQuery& q) const {
  std::shared_lock lock(mutex_);
  std::vector<RecordEvent> out;
  for (const auto& entry : entries_) {
    const auto& e = entry.event;
    if (e.pupil_id != q.pupil_id) continue;
    if (q.from && e.at < *q.from) continue;
    if (q.to && e.at > *q.to) continue;
    if (!q.kinds.empty() && !q.kinds.contains(e.kind())) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<RecordEvent> RecordStore::events() const {
  std::shared_lock lock(mutex_);
  std::vector<RecordEvent> out;
  out.reserve(entries_.size());
  for (const auto& entry : entries_) out.push_back(entry.event);
  return out;
}

std::size_t RecordStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string RecordStore::digest() const {
  std::shared_lock lock(mutex_);
  std::ifstream in(path_, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return hex32(crc32_of(bytes)) + "-" + std::to_string(bytes.size());
}

namespace {

constexpr std::string_view kArchiveMagic = "#vocal-archive ";
constexpr int kArchiveFormat = 1;

}  // namespace

std::string RecordStore::export_archive(std::string_view pupil_id) const {
  std::shared_lock lock(mutex_);
  std::string body;
  std::size_t count = 0;
  for (const auto& entry : entries_) {
    if (entry.event.pupil_id != pupil_id) continue;
    body += entry.line;
    ++count;
  }
  Json header{{"format", kArchiveFormat},
              {"pupil_id", pupil_id},
              {"count", count},
              {"checksum", hex32(crc32_of(body))}};
  return std::string(kArchiveMagic) + header.dump() + '\n' + body;
}

std::vector<RecordEvent> import_archive(std::string_view archive) {
  auto corrupt = [](const std::string& why) { return Error(ErrorCode::CorruptArchive, why); };
  if (archive.substr(0, kArchiveMagic.size()) != kArchiveMagic) throw corrupt("missing archive header");
  const auto nl = archive.find('\n');
  if (nl == std::string_view::npos) throw corrupt("truncated archive header");
  const std::string_view body = archive.substr(nl + 1);

  std::string pupil_id;
  std::size_t count = 0;
  try {
    const Json header = parse_json(archive.substr(kArchiveMagic.size(), nl - kArchiveMagic.size()));
    ObjectReader r(header, "archive header", {"format", "pupil_id", "count", "checksum"});
    if (r.integer("format") != kArchiveFormat) throw corrupt("unsupported archive format");
    pupil_id = r.string("pupil_id");
    const auto c = r.integer("count");
    if (c < 0) throw corrupt("negative event count");
    count = static_cast<std::size_t>(c);
    if (r.string("checksum") != hex32(crc32_of(body))) throw corrupt("archive checksum mismatch");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptArchive) throw;
    throw corrupt(std::string("bad archive header: ") + e.what());
  }

  std::vector<RecordEvent> events;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto end = body.find('\n', pos);
    if (end == std::string_view::npos) throw corrupt("truncated event line");
    try {
      events.push_back(decode_event_line(body.substr(pos, end - pos)));
    } catch (const Error& e) {
      throw corrupt(e.what());
    }
    pos = end + 1;
    const auto& e = events.back();
    if (e.pupil_id != pupil_id) throw corrupt("event for another pupil in archive");
    if (events.size() > 1 && e.event_id <= events[events.size() - 2].event_id)
      throw corrupt("event ids not increasing");
  }
  if (events.size() != count) throw corrupt("event count mismatch");
  return events;
}

std::vector<SessionRecord> session_history(const RecordStore& store, const std::string& pupil_id) {
  RecordQuery q;
  q.pupil_id = pupil_id;
  q.kinds = {EventKind::SessionCompleted};
  std::vector<SessionRecord> out;
  for (auto& e : store.query(q)) out.push_back(std::get<SessionRecord>(std::move(e.body)));
  return out;
}

}  // namespace vocal
