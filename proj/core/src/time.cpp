#include "vocal/time.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <memory>

namespace vocal {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

// Parses exactly `width` decimal digits at text[pos].
std::optional<int> digits(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, value);
  if (ec != std::errc{} || ptr != text.data() + pos + width) return std::nullopt;
  return value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Timestamp system_now() {
  using namespace std::chrono;
  return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

Clock system_clock() { return [] { return system_now(); }; }

Clock stepping_clock(Timestamp start, std::int64_t step_ms) {
  auto next = std::make_shared<std::atomic<std::int64_t>>(start.ms);
  return [next, step_ms] { return Timestamp{next->fetch_add(step_ms)}; };
}

Timestamp from_date(std::chrono::year_month_day date) {
  const std::chrono::sys_days days{date};
  return Timestamp{static_cast<std::int64_t>(days.time_since_epoch().count()) * kMsPerDay};
}

std::chrono::year_month_day to_date(Timestamp ts) {
  const std::chrono::sys_days days{std::chrono::days{floor_div(ts.ms, kMsPerDay)}};
  return std::chrono::year_month_day{days};
}

std::string format_date(std::chrono::year_month_day date) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  const std::int64_t day = floor_div(ts.ms, kMsPerDay);
  std::int64_t rem = ts.ms - day * kMsPerDay;
  const auto date = to_date(ts);
  const int hh = static_cast<int>(rem / 3'600'000);
  rem %= 3'600'000;
  const int mm = static_cast<int>(rem / 60'000);
  rem %= 60'000;
  const int ss = static_cast<int>(rem / 1000);
  const int ms = static_cast<int>(rem % 1000);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ", format_date(date).c_str(), hh, mm,
                ss, ms);
  return buf;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = digits(text, 0, 4);
  auto m = digits(text, 5, 2);
  auto d = digits(text, 8, 2);
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day date{std::chrono::year{*y},
                                   std::chrono::month{static_cast<unsigned>(*m)},
                                   std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.size() == 10 && text[4] == '-') {
    auto date = parse_date(text);
    if (!date) return std::nullopt;
    return from_date(*date);
  }
  if (text.size() == 24 && text[10] == 'T' && text[23] == 'Z') {
    auto date = parse_date(text.substr(0, 10));
    auto hh = digits(text, 11, 2);
    auto mm = digits(text, 14, 2);
    auto ss = digits(text, 17, 2);
    auto ms = digits(text, 20, 3);
    if (!date || !hh || !mm || !ss || !ms || text[13] != ':' || text[16] != ':' ||
        text[19] != '.' || *hh > 23 || *mm > 59 || *ss > 59)
      return std::nullopt;
    return Timestamp{from_date(*date).ms + *hh * 3'600'000LL + *mm * 60'000LL + *ss * 1000LL + *ms};
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return Timestamp{value};
}

}  // namespace vocal
