#include "vocal/legacy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "vocal/error.hpp"

namespace vocal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 style: quoted fields may contain the delimiter, doubled quotes and
// newlines.
std::vector<CsvRecord> split_records(std::string_view text, char delim) {
  std::vector<CsvRecord> out;
  CsvRecord current{1, {}};
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      any = true;
    } else if (c == delim) {
      current.fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        current.fields.push_back(std::move(field));
        out.push_back(std::move(current));
      }
      field.clear();
      any = false;
      ++line;
      current = CsvRecord{line, {}};
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    current.fields.push_back(std::move(field));
    out.push_back(std::move(current));
  }
  return out;
}

}  // namespace

std::optional<LegacyDate> parse_legacy_date(std::string_view text, int default_year) {
  text = trim(text);
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto slash = text.find('/', pos);
    parts.push_back(trim(text.substr(pos, slash == std::string_view::npos ? slash : slash - pos)));
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  if (parts.size() != 2 && parts.size() != 3) return std::nullopt;
  auto d = to_int(parts[0]);
  auto m = to_int(parts[1]);
  if (!d || !m || *d < 1 || *m < 1) return std::nullopt;

  LegacyDate out;
  int year = default_year;
  if (parts.size() == 3) {
    auto y = to_int(parts[2]);
    if (!y || *y < 0) return std::nullopt;
    if (parts[2].size() == 2) year = 2000 + *y;
    else if (parts[2].size() == 4) year = *y;
    else return std::nullopt;
  } else {
    out.inferred = true;
  }
  out.date = std::chrono::year_month_day{std::chrono::year{year},
                                         std::chrono::month{static_cast<unsigned>(*m)},
                                         std::chrono::day{static_cast<unsigned>(*d)}};
  if (!out.date.ok()) return std::nullopt;
  return out;
}

bool LegacyImport::all_ok() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const LegacyRowOutcome& r) { return r.ok; });
}

std::vector<Remark> LegacyImport::remarks() const {
  std::vector<Remark> out;
  for (const auto& row : rows)
    if (row.remark) out.push_back(*row.remark);
  return out;
}

LegacyImport import_legacy(std::string_view table, int default_year) {
  const auto header_end = table.find('\n');
  const std::string_view header_line = table.substr(0, header_end);
  const char delim = header_line.find('\t') != std::string_view::npos ? '\t' : ',';
  auto records = split_records(table, delim);
  if (records.empty()) throw Error(ErrorCode::Parse, "legacy table is empty");

  const auto& header = records.front().fields;
  std::vector<std::string> names;
  for (const auto& h : header) names.push_back(lower(trim(h)));
  if (names.size() < 3 || names[0] != "date" || names[1] != "material" || names[2] != "remarks" ||
      names.size() > 4 || (names.size() == 4 && names[3] != "initials"))
    throw Error(ErrorCode::Parse, "legacy table header must be date,material,remarks[,initials]");
  const bool has_initials = names.size() == 4;

  LegacyImport result;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    LegacyRowOutcome row;
    row.line = rec.line;
    if (rec.fields.size() != names.size() && !(has_initials && rec.fields.size() == 3)) {
      row.message = "expected " + std::to_string(names.size()) + " columns, found " +
                    std::to_string(rec.fields.size());
      result.rows.push_back(std::move(row));
      continue;
    }
    auto date = parse_legacy_date(rec.fields[0], default_year);
    const std::string remarks(trim(rec.fields[2]));
    if (!date) {
      row.message = "unparseable date '" + std::string(trim(rec.fields[0])) + "'";
    } else if (remarks.empty()) {
      row.message = "remarks are empty";
    } else {
      Remark remark;
      remark.date = date->date;
      remark.date_inferred = date->inferred;
      remark.material = std::string(trim(rec.fields[1]));
      remark.remarks = remarks;
      if (has_initials && rec.fields.size() == 4 && !trim(rec.fields[3]).empty())
        remark.author_initials = std::string(trim(rec.fields[3]));
      row.ok = true;
      row.message = date->inferred ? "ok (year inferred)" : "ok";
      row.remark = std::move(remark);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<NewEvent> remark_events(const LegacyImport& import, const std::string& pupil_id,
                                    const std::string& author) {
  std::vector<NewEvent> out;
  for (const auto& remark : import.remarks())
    out.push_back(NewEvent{pupil_id, from_date(remark.date), author, remark});
  return out;
}

}  // namespace vocal
