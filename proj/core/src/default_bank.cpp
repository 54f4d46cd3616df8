#include "vocal/item_bank.hpp"

namespace vocal {

namespace {

std::vector<PhonicsItem> default_items() {
  std::vector<PhonicsItem> items;
  auto add = [&items](std::string id, std::string text, ItemKind kind, int band) {
    items.push_back(PhonicsItem{std::move(id), std::move(text), kind, band});
  };
  // 1: single letters and numerals
  for (const char* letter : {"s", "a", "t", "p", "i", "n", "m", "d", "g", "o"})
    add(std::string("l_") + letter, letter, ItemKind::Letter, 1);
  add("n_3", "3", ItemKind::Number, 1);
  add("n_7", "7", ItemKind::Number, 1);
  // 2: digraph phonemes
  for (const char* ph : {"sh", "ch", "th", "ng", "ck", "qu", "ai", "ee", "oa", "oo", "ar", "or"})
    add(std::string("ph_") + ph, ph, ItemKind::Phoneme, 2);
  // 3: CVC words
  for (const char* w : {"cat", "dog", "sun", "pig", "hat", "bed", "cup", "fox", "map", "net",
                        "red", "bus"})
    add(std::string("w_") + w, w, ItemKind::Word, 3);
  // 4: common exception words
  for (const char* w : {"the", "said", "was", "they", "you", "were", "come", "some", "have",
                        "like", "what", "when"})
    add(std::string("w_") + w, w, ItemKind::Word, 4);
  // 5: longer words
  for (const char* w : {"because", "friend", "people", "school", "little", "animal", "beautiful",
                        "water", "through", "thought", "laugh", "mother"})
    add(std::string("w_") + w, w, ItemKind::Word, 5);
  return items;
}

}  // namespace

const ItemBank& default_bank() {
  static const ItemBank bank = ItemBank::from_items(default_items());
  return bank;
}

}  // namespace vocal
