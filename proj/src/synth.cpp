#include "docseed/synth.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace docseed {

namespace {

constexpr std::array kKeys = {"Date:",      "To:",          "From:",       "Fax Number:", "Phone Number:",
                              "Invoice No.:", "Account #:", "Total Amount:", "Ship To:",  "Reference -",
                              "Pages:",     "Subject:",     "Contact Name:", "P.O. Box:", "Due Date:"};
constexpr std::array kWords = {"George", "Baroody", "Lorillard", "Research", "Winston", "Salem",   "Acme",
                               "Supply", "North",   "Carolina",  "Tobacco",  "Group",   "Street", "Suite"};
constexpr std::array kFiller = {"please", "call", "if",    "you", "do",     "not",  "receive", "all",
                                "pages",  "this", "message", "is", "intended", "only", "for",    "the"};
constexpr std::array kHeaders = {"FAX", "COVER", "SHEET", "INVOICE", "PURCHASE", "ORDER", "MEMO"};

struct Builder {
  std::mt19937_64& rng;
  Document doc;
  GoldEntitySet gold;
  int height;
  int char_width;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  template <std::size_t N>
  std::string pick(const std::array<const char*, N>& pool) {
    return pool[static_cast<std::size_t>(uniform(0, static_cast<int>(N) - 1))];
  }

  std::string random_value_word() {
    switch (uniform(0, 3)) {
      case 0: return std::to_string(uniform(1, 12)) + "/" + std::to_string(uniform(1, 28)) + "/" +
                     std::to_string(uniform(90, 99));
      case 1: return "(" + std::to_string(uniform(200, 999)) + ")";
      case 2: return std::to_string(uniform(100, 999)) + "-" + std::to_string(uniform(1000, 9999));
      default: return pick(kWords);
    }
  }

  int width_of(const std::string& word) const { return static_cast<int>(word.size()) * char_width; }

  // Lays words out left to right from x; returns token indices and the next x.
  std::vector<int> place(const std::vector<std::string>& words, int& x, int y) {
    std::vector<int> indices;
    for (const std::string& w : words) {
      const int idx = static_cast<int>(doc.tokens.size());
      const double conf = uniform(60, 100) / 100.0;
      doc.tokens.push_back({idx, w, {x, y, x + width_of(w), y + height}, conf});
      indices.push_back(idx);
      x += width_of(w) + uniform(6, 10);
    }
    return indices;
  }

  int add_entity(GenericLabel label, const std::vector<int>& indices) {
    const int id = static_cast<int>(gold.entities.size());
    gold.entities.push_back(make_entity(id, label, indices, doc));
    return id;
  }

  std::vector<std::string> key_words() {
    const std::string key = pick(kKeys);
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start < key.size()) {
      const auto space = key.find(' ', start);
      words.push_back(key.substr(start, space == std::string::npos ? std::string::npos : space - start));
      if (space == std::string::npos) break;
      start = space + 1;
    }
    return words;
  }

  std::vector<std::string> value_words(int lo, int hi) {
    std::vector<std::string> words(static_cast<std::size_t>(uniform(lo, hi)));
    for (auto& w : words) w = random_value_word();
    return words;
  }

  int fits(const std::vector<std::string>& words, int x) const {
    for (const auto& w : words) x += width_of(w) + 10;
    return x;
  }

  // key [value] starting at x on row y; value optionally wraps to y_next.
  void pair(int x, int y, int right_limit, bool with_value, std::optional<int> wrap_y) {
    int cursor = x;
    const auto key = place(key_words(), cursor, y);
    const int key_id = add_entity(GenericLabel::key, key);
    if (!with_value) return;
    cursor += uniform(20, 60);
    std::vector<std::string> words = value_words(1, 3);
    while (words.size() > 1 && fits(words, cursor) > right_limit) words.pop_back();
    if (fits(words, cursor) > right_limit) return;
    const int value_x = cursor;
    auto value = place(words, cursor, y);
    if (wrap_y) {
      int wrap_cursor = value_x;
      std::vector<std::string> more = value_words(1, 2);
      while (!more.empty() && fits(more, wrap_cursor) > right_limit) more.pop_back();
      auto extra = place(more, wrap_cursor, *wrap_y);
      value.insert(value.end(), extra.begin(), extra.end());
    }
    gold.links.push_back({key_id, add_entity(GenericLabel::value, value)});
  }
};

}  // namespace

std::pair<Document, GoldEntitySet> synth_form(std::mt19937_64& rng, const std::string& doc_id) {
  Builder b{rng, {}, {}, 0, 0};
  b.doc.doc_id = doc_id;
  b.doc.page = {b.uniform(8, 10) * 100, b.uniform(10, 13) * 100, std::nullopt};
  b.height = b.uniform(18, 26);
  b.char_width = b.uniform(8, 11);
  const int margin = 40;
  const int right = b.doc.page.width - margin;
  const int row_gap = b.height + b.uniform(b.height / 2, b.height);

  int y = margin;
  {
    std::vector<std::string> words(static_cast<std::size_t>(b.uniform(1, 3)));
    for (auto& w : words) w = b.pick(kHeaders);
    int x = margin;
    b.add_entity(GenericLabel::header, b.place(words, x, y));
    y += row_gap * 2;
  }

  const int rows = b.uniform(4, 10);
  for (int r = 0; r < rows && y + 2 * row_gap < b.doc.page.height - margin; ++r) {
    switch (b.uniform(0, 5)) {
      case 0:
      case 1:
        b.pair(margin, y, right, true, std::nullopt);
        break;
      case 2: {
        const int mid = b.doc.page.width / 2;
        b.pair(margin, y, mid - 20, true, std::nullopt);
        b.pair(mid, y, right, b.uniform(0, 3) > 0, std::nullopt);
        break;
      }
      case 3:
        b.pair(margin, y, right, true, y + row_gap);
        y += row_gap;
        break;
      case 4:
        b.pair(margin, y, right, false, std::nullopt);
        break;
      default: {
        std::vector<std::string> words(static_cast<std::size_t>(b.uniform(2, 6)));
        for (auto& w : words) w = b.pick(kFiller);
        while (words.size() > 1 && b.fits(words, margin) > right) words.pop_back();
        int x = margin;
        b.add_entity(GenericLabel::other, b.place(words, x, y));
      }
    }
    y += row_gap;
  }
  std::sort(b.gold.links.begin(), b.gold.links.end());
  return {std::move(b.doc), std::move(b.gold)};
}

std::vector<Entity> synth_link_entities(std::mt19937_64& rng, int max_entities, const Page& page) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uniform(0, max_entities);
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<Entity> out;
  for (int i = 0; i < n; ++i) {
    const int roll = uniform(0, 9);
    const GenericLabel label = roll < 4   ? GenericLabel::key
                               : roll < 8 ? GenericLabel::value
                               : roll < 9 ? GenericLabel::header
                                          : GenericLabel::other;
    const int w = uniform(1, 4) * 50;
    const int h = uniform(1, 3) * 20;
    const int x1 = uniform(0, std::max(0, (page.width - w) / 50)) * 50;
    const int y1 = uniform(0, std::max(0, (page.height - h) / 20)) * 20;
    const BBox box{x1, y1, std::min(page.width, x1 + w), std::min(page.height, y1 + h)};
    const int id = ids[static_cast<std::size_t>(i)];
    out.push_back({id, label, {id}, "e" + std::to_string(id), box});
  }
  return out;
}

std::pair<Document, GoldEntitySet> fax_mini_form() {
  Document doc;
  doc.doc_id = "fax-mini";
  doc.page = {850, 1100, std::nullopt};
  const std::vector<std::pair<std::string, BBox>> words = {
      {"To:", {100, 200, 160, 230}},        {"George", {200, 200, 290, 230}},   {"Baroody", {300, 200, 400, 230}},
      {"Date:", {100, 260, 170, 290}},      {"12/10/98", {200, 260, 320, 290}}, {"Fax", {100, 320, 150, 350}},
      {"Number:", {160, 320, 270, 350}},    {"(336)", {300, 320, 370, 350}},    {"335-7392", {380, 320, 500, 350}},
      {"Phone", {100, 380, 180, 410}},      {"Number:", {190, 380, 300, 410}}};
  for (const auto& [text, box] : words)
    doc.tokens.push_back({static_cast<int>(doc.tokens.size()), text, box, std::nullopt});

  GoldEntitySet gold;
  gold.entities = {make_entity(0, GenericLabel::key, {0}, doc),     make_entity(1, GenericLabel::value, {1, 2}, doc),
                   make_entity(2, GenericLabel::key, {3}, doc),     make_entity(3, GenericLabel::value, {4}, doc),
                   make_entity(4, GenericLabel::key, {5, 6}, doc),  make_entity(5, GenericLabel::value, {7, 8}, doc),
                   make_entity(6, GenericLabel::key, {9, 10}, doc)};
  gold.links = {{0, 1}, {2, 3}, {4, 5}};
  return {std::move(doc), std::move(gold)};
}

}  // namespace docseed
