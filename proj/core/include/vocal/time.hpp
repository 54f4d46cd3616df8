#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace vocal {

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t ms = 0;

  auto operator<=>(const Timestamp&) const = default;
};

/// Injectable time source; sessions and the service never read the wall clock
/// directly so tests can pin every timestamp.
using Clock = std::function<Timestamp()>;

Timestamp system_now();
Clock system_clock();
/// Returns start, start+step, start+2*step, ... on successive calls.
Clock stepping_clock(Timestamp start, std::int64_t step_ms);

Timestamp from_date(std::chrono::year_month_day date);
std::chrono::year_month_day to_date(Timestamp ts);

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_timestamp(Timestamp ts);
/// "YYYY-MM-DD"
std::string format_date(std::chrono::year_month_day date);

/// Accepts the format_timestamp form, a bare "YYYY-MM-DD" date, or an integer
/// millisecond count.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);

}  // namespace vocal
