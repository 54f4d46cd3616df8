#include "vocal/item_bank.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "vocal/error.hpp"
#include "vocal/rng.hpp"

namespace vocal {

std::string_view to_string(ItemKind kind) noexcept {
  switch (kind) {
    case ItemKind::Letter: return "letter";
    case ItemKind::Phoneme: return "phoneme";
    case ItemKind::Word: return "word";
    case ItemKind::Number: return "number";
  }
  return "letter";
}

ItemKind parse_item_kind(std::string_view text) {
  if (text == "letter") return ItemKind::Letter;
  if (text == "phoneme") return ItemKind::Phoneme;
  if (text == "word") return ItemKind::Word;
  if (text == "number") return ItemKind::Number;
  throw Error(ErrorCode::Parse, "unknown item kind '" + std::string(text) + "'");
}

namespace {

bool is_non_negative_integer(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void validate_item(const PhonicsItem& item) {
  if (item.item_id.empty()) throw Error(ErrorCode::Validation, "item with empty item_id");
  const std::string where = "item '" + item.item_id + "'";
  if (item.text.empty()) throw Error(ErrorCode::Validation, where + " has empty text");
  if (item.band < 1) throw Error(ErrorCode::Validation, where + " has band < 1");
  if (item.kind == ItemKind::Letter && item.text.size() != 1)
    throw Error(ErrorCode::Validation, where + " is a letter but text length is not 1");
  if (item.kind == ItemKind::Number && !is_non_negative_integer(item.text))
    throw Error(ErrorCode::Validation, where + " is a number but text is not a non-negative integer");
}

}  // namespace

ItemBank ItemBank::from_items(std::vector<PhonicsItem> items) {
  std::unordered_set<std::string> seen;
  std::set<int> bands;
  for (const auto& item : items) {
    validate_item(item);
    if (!seen.insert(item.item_id).second)
      throw Error(ErrorCode::Validation, "duplicate item_id '" + item.item_id + "'");
    bands.insert(item.band);
  }
  int expected = 1;
  for (int band : bands) {
    if (band != expected)
      throw Error(ErrorCode::Validation,
                  "band gap: band " + std::to_string(expected) + " has no items");
    ++expected;
  }
  ItemBank bank;
  bank.items_ = std::move(items);
  bank.bands_.assign(bands.begin(), bands.end());
  return bank;
}

bool ItemBank::has_band(int band) const noexcept {
  return std::binary_search(bands_.begin(), bands_.end(), band);
}

std::vector<PhonicsItem> ItemBank::band_items(int band) const {
  if (!has_band(band))
    throw Error(ErrorCode::UnknownBand, "unknown band " + std::to_string(band));
  std::vector<PhonicsItem> out;
  std::copy_if(items_.begin(), items_.end(), std::back_inserter(out),
               [band](const PhonicsItem& item) { return item.band == band; });
  return out;
}

const PhonicsItem* ItemBank::find(std::string_view item_id) const noexcept {
  auto it = std::find_if(items_.begin(), items_.end(),
                         [item_id](const PhonicsItem& item) { return item.item_id == item_id; });
  return it == items_.end() ? nullptr : &*it;
}

namespace {

// Unexcluded items of `band`, canonically ordered by id then shuffled with a
// per-band stream so the result does not depend on bank file order.
std::vector<const PhonicsItem*> shuffled_pool(const ItemBank& bank, int band,
                                              const SelectionRequest& request) {
  std::vector<const PhonicsItem*> pool;
  if (!bank.has_band(band)) return pool;
  for (const auto& item : bank.items())
    if (item.band == band && !request.exclude.contains(item.item_id)) pool.push_back(&item);
  std::sort(pool.begin(), pool.end(),
            [](const PhonicsItem* a, const PhonicsItem* b) { return a->item_id < b->item_id; });
  Rng rng(mix_seed(request.seed, static_cast<std::uint64_t>(band)));
  rng.shuffle(std::span(pool));
  return pool;
}

}  // namespace

std::vector<PhonicsItem> select_items(const ItemBank& bank, const SelectionRequest& request) {
  if (request.count < 1) throw Error(ErrorCode::Validation, "selection count must be >= 1");
  if (!bank.has_band(request.target_band))
    throw Error(ErrorCode::UnknownBand, "unknown band " + std::to_string(request.target_band));

  std::vector<PhonicsItem> out;
  for (int band : {request.target_band, request.target_band - 1, request.target_band + 1}) {
    for (const PhonicsItem* item : shuffled_pool(bank, band, request)) {
      if (out.size() == request.count) break;
      out.push_back(*item);
    }
    if (out.size() == request.count) break;
  }
  if (out.empty())
    throw Error(ErrorCode::EmptyBand, "band " + std::to_string(request.target_band) +
                                          " and its neighbours have no selectable items");
  return out;
}

namespace {

PhonicsItem item_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "item record is not an object");
  for (const auto& [key, _] : j.items())
    if (key != "item_id" && key != "text" && key != "kind" && key != "band")
      throw Error(ErrorCode::Parse, "unknown field '" + key + "'");
  for (const char* key : {"item_id", "text", "kind", "band"})
    if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  if (!j["item_id"].is_string() || !j["text"].is_string() || !j["kind"].is_string() ||
      !j["band"].is_number_integer())
    throw Error(ErrorCode::Parse, "field has wrong type");
  PhonicsItem item;
  item.item_id = j["item_id"].get<std::string>();
  item.text = j["text"].get<std::string>();
  item.kind = parse_item_kind(j["kind"].get<std::string>());
  item.band = j["band"].get<int>();
  return item;
}

}  // namespace

ItemBank load_bank(std::string_view source) {
  std::vector<PhonicsItem> items;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, e.what());
      }
      items.push_back(item_from_json(j));
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(line_no));
    }
  }
  return ItemBank::from_items(std::move(items));
}

std::vector<std::string> bank_findings(std::string_view source) {
  std::vector<std::string> findings;
  std::unordered_set<std::string> seen;
  std::set<int> bands;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, e.what());
      }
      PhonicsItem item = item_from_json(j);
      validate_item(item);
      if (!seen.insert(item.item_id).second)
        findings.push_back(where + "duplicate item_id '" + item.item_id + "'");
      bands.insert(item.band);
    } catch (const Error& e) {
      findings.push_back(where + e.what());
    }
  }
  int expected = 1;
  for (int band : bands) {
    for (; expected < band; ++expected)
      findings.push_back("band gap: band " + std::to_string(expected) + " has no items");
    expected = band + 1;
  }
  return findings;
}

ItemBank load_bank_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open bank file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_bank(ss.str());
}

std::string serialize_bank(const ItemBank& bank) {
  std::string out;
  for (const auto& item : bank.items()) {
    nlohmann::ordered_json j;
    j["item_id"] = item.item_id;
    j["text"] = item.text;
    j["kind"] = to_string(item.kind);
    j["band"] = item.band;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace vocal
