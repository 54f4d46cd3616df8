#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vocal {

enum class ItemKind { Letter, Phoneme, Word, Number };

std::string_view to_string(ItemKind kind) noexcept;
ItemKind parse_item_kind(std::string_view text);

/// A readable unit shown inside a bubble.
struct PhonicsItem {
  std::string item_id;
  std::string text;
  ItemKind kind = ItemKind::Letter;
  int band = 1;

  bool operator==(const PhonicsItem&) const = default;
};

/// Immutable catalogue of items grouped into dense difficulty bands 1..N.
class ItemBank {
 public:
  ItemBank() = default;

  /// Validates and builds a bank; throws Error{Validation} on duplicate ids,
  /// empty text, kind/text mismatches, band < 1 or gaps in the band sequence.
  static ItemBank from_items(std::vector<PhonicsItem> items);

  const std::vector<PhonicsItem>& items() const noexcept { return items_; }
  /// Sorted ascending, no gaps.
  const std::vector<int>& bands() const noexcept { return bands_; }
  bool has_band(int band) const noexcept;
  int max_band() const noexcept { return bands_.empty() ? 0 : bands_.back(); }
  bool empty() const noexcept { return items_.empty(); }

  /// Items of one band in bank order; throws Error{UnknownBand}.
  std::vector<PhonicsItem> band_items(int band) const;
  /// nullptr when absent.
  const PhonicsItem* find(std::string_view item_id) const noexcept;

 private:
  std::vector<PhonicsItem> items_;
  std::vector<int> bands_;
};

struct SelectionRequest {
  int target_band = 1;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::set<std::string> exclude;
};

/// Picks up to `count` distinct items from the target band, backfilling from
/// band-1 then band+1. Deterministic for a given (bank, request).
/// Throws Error{EmptyBand} when nothing is left in the three bands and
/// Error{UnknownBand}/Error{Validation} on a malformed request.
std::vector<PhonicsItem> select_items(const ItemBank& bank, const SelectionRequest& request);

/// Bank source: one JSON object per line with item_id, text, kind, band.
/// Blank lines and lines starting with '#' are skipped.
ItemBank load_bank(std::string_view source);
/// Every problem in a bank source, one message per finding; empty when valid.
std::vector<std::string> bank_findings(std::string_view source);
ItemBank load_bank_file(const std::filesystem::path& path);
std::string serialize_bank(const ItemBank& bank);

/// Illustrative 60-item, 5-band bank used by fixtures and the simulator.
const ItemBank& default_bank();

}  // namespace vocal
