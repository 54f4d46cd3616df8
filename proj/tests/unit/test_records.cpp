#include <doctest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "vocal/error.hpp"
#include "vocal/records.hpp"

using namespace vocal;
using namespace std::chrono;

namespace {

NewEvent remark_event(const std::string& pupil, std::int64_t at_ms, const std::string& text) {
  Remark r;
  r.date = to_date(Timestamp{at_ms});
  r.material = "Book";
  r.remarks = text;
  return NewEvent{pupil, Timestamp{at_ms}, "teacher", r};
}

NewEvent flag_event(const std::string& pupil, std::int64_t at_ms, const std::string& item) {
  return NewEvent{pupil, Timestamp{at_ms}, "teacher", Flag{pupil, item, 0.2, 4, 1, Timestamp{at_ms}}};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Parse;
}

}  // namespace

TEST_CASE("event ids start at one and increase") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  CHECK(store.append(remark_event("p1", 1000, "first")).event_id == 1);
  CHECK(store.append(remark_event("p1", 2000, "second")).event_id == 2);
  const auto batch = store.append_batch({remark_event("p2", 3000, "x"), flag_event("p2", 3000, "a")});
  CHECK(batch[0].event_id == 3);
  CHECK(batch[1].event_id == 4);
  CHECK(store.size() == 4);
}

TEST_CASE("events survive a reopen") {
  fixture::TempDir dir;
  RecordEvent written;
  {
    RecordStore store(dir / "log");
    std::mt19937_64 rng(1);
    written = store.append(fixture::random_event(rng, {"p1"}));
  }
  RecordStore reopened(dir / "log");
  REQUIRE(reopened.size() == 1);
  CHECK(reopened.events()[0] == written);
  CHECK(reopened.append(remark_event("p1", 5, "next")).event_id == 2);
}

TEST_CASE("a torn final line is discarded, other damage is fatal") {
  fixture::TempDir dir;
  {
    RecordStore store(dir / "log");
    store.append(remark_event("p1", 1000, "keep"));
  }
  {
    std::ofstream out(dir / "log", std::ios::app | std::ios::binary);
    out << "2 deadbeef {\"event_id\":2,";
  }
  {
    RecordStore store(dir / "log");
    CHECK(store.size() == 1);
    CHECK(store.append(remark_event("p1", 2000, "after")).event_id == 2);
  }
  std::string bytes = fixture::read_file(dir / "log");
  bytes[bytes.find("keep")] = 'K';
  {
    std::ofstream out(dir / "log", std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  CHECK(code_of([&] { RecordStore s(dir / "log"); }) == ErrorCode::Storage);
}

TEST_CASE("line encoding round trips") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 40; ++i) {
    const NewEvent e = fixture::random_event(rng, {"p1", "p2"});
    const RecordEvent r{static_cast<std::uint64_t>(i + 1), e.pupil_id, e.at, e.author, e.body};
    std::string line = encode_event_line(r);
    REQUIRE(line.back() == '\n');
    line.pop_back();
    CHECK(decode_event_line(line) == r);
  }
}

TEST_CASE("query filters") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  CHECK(store.query(RecordQuery{"nobody", {}, {}, {}}).empty());
  int flags = 0;
  for (int i = 0; i < 10; ++i) {
    if (i % 3 == 1) {
      store.append(flag_event("p1", 1000 * i, "i" + std::to_string(i)));
      ++flags;
    } else {
      store.append(remark_event("p1", 1000 * i, "r" + std::to_string(i)));
    }
  }
  store.append(remark_event("p2", 500, "other pupil"));
  REQUIRE(flags == 3);

  const auto only_flags = store.query(RecordQuery{"p1", {}, {}, {EventKind::FlagRaised}});
  REQUIRE(only_flags.size() == 3);
  for (const auto& e : only_flags) CHECK(e.kind() == EventKind::FlagRaised);
  CHECK(only_flags[0].event_id < only_flags[1].event_id);

  CHECK(store.query(RecordQuery{"p1", Timestamp{-1'000'000}, Timestamp{1'000'000}, {}}).size() == 10);
  const auto window = store.query(RecordQuery{"p1", Timestamp{2000}, Timestamp{4000}, {}});
  REQUIRE(window.size() == 3);
  CHECK(window.front().at == Timestamp{2000});
  CHECK(window.back().at == Timestamp{4000});
}

TEST_CASE("batches are all or none") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  store.append(remark_event("p1", 1, "ok"));
  const auto before = store.digest();
  auto bad = remark_event("p1", 2, "");
  CHECK(code_of([&] { store.append_batch({remark_event("p1", 2, "fine"), bad}); }) == ErrorCode::Validation);
  CHECK(store.size() == 1);
  CHECK(store.digest() == before);
}

TEST_CASE("validate_event") {
  CHECK(code_of([] { validate_event(remark_event("", 1, "x")); }) == ErrorCode::Validation);
  auto no_author = remark_event("p1", 1, "x");
  no_author.author.clear();
  CHECK(code_of([&] { validate_event(no_author); }) == ErrorCode::Validation);
  auto foreign_flag = flag_event("p1", 1, "a");
  std::get<Flag>(foreign_flag.body).pupil_id = "p2";
  CHECK(code_of([&] { validate_event(foreign_flag); }) == ErrorCode::Validation);

  std::mt19937_64 rng(2);
  for (;;) {
    auto e = fixture::random_event(rng, {"p1"});
    if (auto* s = std::get_if<SessionRecord>(&e.body)) {
      CHECK_NOTHROW(validate_event(e));
      s->final_score = 300;
      CHECK(code_of([&] { validate_event(e); }) == ErrorCode::Validation);
      s->final_score = 100;
      s->attempts.clear();
      CHECK(code_of([&] { validate_event(e); }) == ErrorCode::Validation);
      break;
    }
  }
}

TEST_CASE("archive round trip and tamper detection") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) store.append(fixture::random_event(rng, {"p1", "p2"}));
  const auto archive = store.export_archive("p1");
  const auto expected = store.query(RecordQuery{"p1", {}, {}, {}});
  CHECK(import_archive(archive) == expected);
  CHECK(code_of([&] { import_archive("garbage"); }) == ErrorCode::CorruptArchive);

  // Every single-byte change is caught.
  RecordStore small_store(dir / "small");
  for (int i = 0; i < 3; ++i) small_store.append(fixture::random_event(rng, {"p9"}));
  const auto small = small_store.export_archive("p9");
  for (std::size_t i = 0; i < small.size(); ++i) {
    std::string tampered = small;
    tampered[i] = static_cast<char>(tampered[i] ^ 0x01);
    CHECK(code_of([&] { import_archive(tampered); }) == ErrorCode::CorruptArchive);
  }

  CHECK(import_archive(store.export_archive("nobody")).empty());
  RecordStore empty(dir / "empty");
  CHECK(import_archive(empty.export_archive("p1")).empty());
}

TEST_CASE("reads never change the log") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  std::mt19937_64 rng(6);
  for (int i = 0; i < 30; ++i) store.append(fixture::random_event(rng, {"p1", "p2"}));
  const auto before = store.digest();
  const auto bytes = fixture::read_file(dir / "log");
  store.events();
  store.query(RecordQuery{"p1", {}, {}, {EventKind::SessionCompleted}});
  store.export_archive("p2");
  session_history(store, "p1");
  CHECK(store.digest() == before);
  CHECK(fixture::read_file(dir / "log") == bytes);
}

TEST_CASE("session_history keeps log order") {
  fixture::TempDir dir;
  RecordStore store(dir / "log");
  std::mt19937_64 rng(8);
  std::vector<SessionRecord> expected;
  for (int i = 0; i < 40; ++i) {
    auto e = fixture::random_event(rng, {"p1"});
    if (auto* s = std::get_if<SessionRecord>(&e.body)) expected.push_back(*s);
    store.append(std::move(e));
  }
  CHECK(session_history(store, "p1") == expected);
}

TEST_CASE("event kinds by name") {
  for (auto k : {EventKind::SessionCompleted, EventKind::AttemptLogged, EventKind::FlagRaised,
                 EventKind::RemarkAdded})
    CHECK(parse_event_kind(to_string(k)) == k);
  CHECK_FALSE(parse_event_kind("Nope").has_value());
}
