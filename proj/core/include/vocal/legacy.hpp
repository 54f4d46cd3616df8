#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vocal/records.hpp"

namespace vocal {

struct LegacyDate {
  std::chrono::year_month_day date;
  bool inferred = false;
};

/// "d/m/yy", "d/m/yyyy" or "d/m" (year taken from default_year, marked as
/// inferred). Two-digit years map to 2000-2099. nullopt when unparseable.
std::optional<LegacyDate> parse_legacy_date(std::string_view text, int default_year);

struct LegacyRowOutcome {
  std::size_t line = 0;  // 1-based line in the source table
  bool ok = false;
  std::string message;
  std::optional<Remark> remark;
};

struct LegacyImport {
  std::vector<LegacyRowOutcome> rows;

  bool all_ok() const noexcept;
  std::vector<Remark> remarks() const;
};

/// Reads a comma- or tab-separated table with header date,material,remarks
/// (optional fourth column "initials"). Bad rows are reported, not dropped.
/// Throws Error{Parse} only when the header itself is unusable.
LegacyImport import_legacy(std::string_view table, int default_year);

/// RemarkAdded events for the successfully parsed rows, dated at midnight UTC.
std::vector<NewEvent> remark_events(const LegacyImport& import, const std::string& pupil_id,
                                    const std::string& author);

}  // namespace vocal
