#include "docseed/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "docseed/error.hpp"

namespace docseed {

using nlohmann::json;

const Entity* GoldEntitySet::find(int entity_id) const {
  for (const Entity& e : entities)
    if (e.id == entity_id) return &e;
  return nullptr;
}

namespace {

constexpr std::array<std::string_view, 12> kTsvColumns = {
    "level", "page_num", "block_num", "par_num", "line_num", "word_num",
    "left",  "top",      "width",     "height",  "conf",     "text"};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int parse_int_field(std::string_view field, std::string_view column, std::size_t line_no) {
  int value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw FormatError("non-numeric " + std::string(column) + " '" + std::string(field) + "'", line_no);
  return value;
}

double parse_double_field(std::string_view field, std::string_view column, std::size_t line_no) {
  double value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw FormatError("non-numeric " + std::string(column) + " '" + std::string(field) + "'", line_no);
  return value;
}

struct PendingToken {
  Token token;
  std::size_t line_no;
};

struct PendingPage {
  std::optional<Page> page;
  std::vector<PendingToken> tokens;
};

}  // namespace

std::vector<Document> parse_ocr_tsv_pages(std::string_view content, const std::string& doc_id) {
  std::map<int, PendingPage> pages;
  bool saw_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (!saw_header) {
      const auto fields = split_tabs(line);
      if (!std::equal(fields.begin(), fields.end(), kTsvColumns.begin(), kTsvColumns.end()))
        throw FormatError("missing or malformed TSV header row", line_no);
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    auto fields = split_tabs(line);
    if (fields.size() == 11) fields.emplace_back();  // empty text, no trailing tab
    if (fields.size() != 12)
      throw FormatError("expected 12 tab-separated columns, found " + std::to_string(fields.size()),
                        line_no);
    const int level = parse_int_field(fields[0], kTsvColumns[0], line_no);
    const int page_num = parse_int_field(fields[1], kTsvColumns[1], line_no);
    for (std::size_t c = 2; c < 6; ++c) parse_int_field(fields[c], kTsvColumns[c], line_no);
    const int left = parse_int_field(fields[6], "left", line_no);
    const int top = parse_int_field(fields[7], "top", line_no);
    const int width = parse_int_field(fields[8], "width", line_no);
    const int height = parse_int_field(fields[9], "height", line_no);
    const double conf = parse_double_field(fields[10], "conf", line_no);

    PendingPage& page = pages[page_num];
    if (level == 1) {
      if (page.page) throw FormatError("duplicate page row for page " + std::to_string(page_num), line_no);
      if (width <= 0 || height <= 0) throw FormatError("page size must be positive", line_no);
      page.page = Page{width, height, std::nullopt};
      continue;
    }
    if (level != 5) continue;
    std::string text = trim(fields[11]);
    if (text.empty()) continue;
    if (left < 0 || top < 0 || width < 0 || height < 0)
      throw FormatError("negative word geometry", line_no);
    Token token;
    token.text = std::move(text);
    token.box = BBox{left, top, left + width, top + height};
    if (conf == -1.0) {
      token.ocr_confidence = std::nullopt;
    } else if (conf >= 0.0 && conf <= 100.0) {
      token.ocr_confidence = conf / 100.0;
    } else {
      throw FormatError("confidence out of range", line_no);
    }
    page.tokens.push_back({std::move(token), line_no});
  }
  if (!saw_header) throw FormatError("missing TSV header row", 1);

  std::vector<Document> docs;
  for (auto& [page_num, pending] : pages) {
    if (!pending.page)
      throw FormatError("no level=1 page row for page " + std::to_string(page_num));
    Document doc;
    doc.doc_id = pages.size() == 1 ? doc_id : doc_id + "-p" + std::to_string(page_num);
    doc.page = *pending.page;
    for (auto& pt : pending.tokens) {
      if (!doc.page.contains(pt.token.box)) throw FormatError("word box outside page bounds", pt.line_no);
      pt.token.index = static_cast<int>(doc.tokens.size());
      doc.tokens.push_back(std::move(pt.token));
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw FormatError("no level=1 page row");
  return docs;
}

Document parse_ocr_tsv(std::string_view content, const std::string& doc_id) {
  auto docs = parse_ocr_tsv_pages(content, doc_id);
  if (docs.size() != 1)
    throw FormatError("TSV holds " + std::to_string(docs.size()) +
                      " pages; split it with parse_ocr_tsv_pages");
  return std::move(docs.front());
}

namespace {

std::string_view funsd_label_name(GenericLabel label) {
  switch (label) {
    case GenericLabel::key: return "question";
    case GenericLabel::value: return "answer";
    case GenericLabel::header: return "header";
    case GenericLabel::other: return "other";
  }
  return "other";
}

std::optional<GenericLabel> funsd_label(std::string_view name) {
  if (name == "question") return GenericLabel::key;
  if (name == "answer") return GenericLabel::value;
  if (name == "header") return GenericLabel::header;
  if (name == "other") return GenericLabel::other;
  return std::nullopt;
}

int as_int(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<int>(d);
  }
  throw FormatError(what + " must be an integer");
}

BBox as_box(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 4) throw FormatError(what + " must be [x1,y1,x2,y2]");
  BBox b{as_int(v[0], what), as_int(v[1], what), as_int(v[2], what), as_int(v[3], what)};
  if (!b.valid()) throw FormatError(what + " is not a valid box");
  return b;
}

const json& member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing \"" + key + "\"");
  return *it;
}

struct RawWord {
  std::string text;
  BBox box;
  std::optional<double> conf;
  std::optional<int> index;
};

struct RawElement {
  int id = 0;
  GenericLabel label = GenericLabel::other;
  std::optional<std::string> specific_label;
  std::optional<std::string> text;
  std::vector<RawWord> words;
};

}  // namespace

std::pair<Document, GoldEntitySet> parse_funsd(std::string_view content, const std::string& doc_id) {
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw FormatError("FUNSD file must be a JSON object");
  const json& form = member(root, "form", "FUNSD file");
  if (!form.is_array()) throw FormatError("\"form\" must be an array");

  bool specific_space = false;
  if (auto it = root.find("label_space"); it != root.end()) {
    if (*it == "document_specific") {
      specific_space = true;
    } else if (*it != "generic") {
      throw FormatError("unknown label_space");
    }
  }

  std::vector<RawElement> elements;
  std::vector<std::pair<int, int>> raw_links;
  std::set<int> all_ids;
  for (std::size_t n = 0; n < form.size(); ++n) {
    const json& el = form[n];
    const std::string where = "form[" + std::to_string(n) + "]";
    if (!el.is_object()) throw FormatError(where + " must be an object");
    RawElement raw;
    raw.id = as_int(member(el, "id", where), where + ".id");
    if (!all_ids.insert(raw.id).second) throw FormatError(where + ": duplicate id " + std::to_string(raw.id));
    const json& label = member(el, "label", where);
    if (!label.is_string()) throw FormatError(where + ".label must be a string");
    const std::string label_name = label.get<std::string>();
    if (auto g = funsd_label(label_name)) {
      raw.label = *g;
    } else if (specific_space && !trim(label_name).empty()) {
      raw.label = GenericLabel::value;
      raw.specific_label = label_name;
    } else {
      throw FormatError(where + ": unknown label \"" + label_name + "\"");
    }
    if (auto it = el.find("text"); it != el.end()) {
      if (!it->is_string()) throw FormatError(where + ".text must be a string");
      raw.text = it->get<std::string>();
    }
    if (auto it = el.find("words"); it != el.end()) {
      if (!it->is_array()) throw FormatError(where + ".words must be an array");
      for (std::size_t w = 0; w < it->size(); ++w) {
        const json& word = (*it)[w];
        const std::string wwhere = where + ".words[" + std::to_string(w) + "]";
        if (!word.is_object()) throw FormatError(wwhere + " must be an object");
        const json& text = member(word, "text", wwhere);
        if (!text.is_string()) throw FormatError(wwhere + ".text must be a string");
        RawWord rw;
        rw.text = trim(text.get<std::string>());
        rw.box = as_box(member(word, "box", wwhere), wwhere + ".box");
        if (auto c = word.find("conf"); c != word.end() && !c->is_null()) {
          if (!c->is_number()) throw FormatError(wwhere + ".conf must be a number");
          rw.conf = c->get<double>();
        }
        if (auto i = word.find("i"); i != word.end()) rw.index = as_int(*i, wwhere + ".i");
        if (rw.text.empty()) continue;
        raw.words.push_back(std::move(rw));
      }
    }
    if (auto it = el.find("linking"); it != el.end()) {
      if (!it->is_array()) throw FormatError(where + ".linking must be an array");
      for (const json& pair : *it) {
        if (!pair.is_array() || pair.size() != 2) throw FormatError(where + ": linking entries are [from, to]");
        raw_links.emplace_back(as_int(pair[0], where + ".linking"), as_int(pair[1], where + ".linking"));
      }
    }
    elements.push_back(std::move(raw));
  }

  // Token numbering: explicit "i" on every word, or flattening order.
  std::size_t word_count = 0, indexed = 0;
  for (const auto& el : elements)
    for (const auto& w : el.words) {
      ++word_count;
      if (w.index) ++indexed;
    }
  if (indexed != 0 && indexed != word_count)
    throw FormatError("word \"i\" indices must be given for all words or none");

  Document doc;
  doc.doc_id = doc_id;
  doc.tokens.resize(word_count);
  std::vector<bool> filled(word_count, false);
  std::vector<std::vector<int>> element_tokens(elements.size());
  int next = 0;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (const auto& w : elements[e].words) {
      const int idx = indexed ? *w.index : next++;
      if (idx < 0 || static_cast<std::size_t>(idx) >= word_count || filled[static_cast<std::size_t>(idx)])
        throw FormatError("word indices must be a permutation of 0..n-1");
      filled[static_cast<std::size_t>(idx)] = true;
      Token& t = doc.tokens[static_cast<std::size_t>(idx)];
      t.index = idx;
      t.text = w.text;
      t.box = w.box;
      t.ocr_confidence = w.conf;
      element_tokens[e].push_back(idx);
    }
  }

  if (auto it = root.find("page"); it != root.end()) {
    if (!it->is_object()) throw FormatError("\"page\" must be an object");
    doc.page.width = as_int(member(*it, "width", "page"), "page.width");
    doc.page.height = as_int(member(*it, "height", "page"), "page.height");
    if (auto img = it->find("image"); img != it->end() && img->is_string())
      doc.page.image_ref = img->get<std::string>();
  } else {
    doc.page.width = 1;
    doc.page.height = 1;
    for (const Token& t : doc.tokens) {
      doc.page.width = std::max(doc.page.width, t.box.x2);
      doc.page.height = std::max(doc.page.height, t.box.y2);
    }
  }
  validate(doc);

  GoldEntitySet gold;
  std::map<int, GenericLabel> kept;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const RawElement& raw = elements[e];
    if (element_tokens[e].empty()) continue;
    Entity entity = make_entity(raw.id, raw.label, element_tokens[e], doc);
    if (raw.text && *raw.text != entity.text) gold.text_overrides[raw.id] = *raw.text;
    if (raw.specific_label) gold.specific_labels[raw.id] = *raw.specific_label;
    kept[raw.id] = raw.label;
    gold.entities.push_back(std::move(entity));
  }

  std::set<Link> links;
  for (auto [from, to] : raw_links) {
    if (!all_ids.count(from) || !all_ids.count(to))
      throw FormatError("linking references missing id " + std::to_string(all_ids.count(from) ? to : from));
    auto a = kept.find(from);
    auto b = kept.find(to);
    if (a == kept.end() || b == kept.end()) continue;
    if (a->second == GenericLabel::key && b->second == GenericLabel::value) {
      links.insert({from, to});
    } else if (a->second == GenericLabel::value && b->second == GenericLabel::key) {
      links.insert({to, from});
    }
  }
  gold.links.assign(links.begin(), links.end());
  return {std::move(doc), std::move(gold)};
}

GoldEntitySet with_fill_entities(const Document& document, GoldEntitySet form) {
  std::vector<bool> covered(document.tokens.size(), false);
  int max_id = -1;
  for (const Entity& e : form.entities) {
    max_id = std::max(max_id, e.id);
    for (int idx : e.token_indices) covered.at(static_cast<std::size_t>(idx)) = true;
  }
  std::size_t i = 0;
  while (i < covered.size()) {
    if (covered[i]) {
      ++i;
      continue;
    }
    std::vector<int> run;
    while (i < covered.size() && !covered[i]) run.push_back(static_cast<int>(i++));
    form.entities.push_back(make_entity(++max_id, GenericLabel::other, std::move(run), document));
  }
  return form;
}

std::string export_funsd(const Document& document, const GoldEntitySet& partial) {
  const GoldEntitySet form = with_fill_entities(document, partial);
  json root = json::object();
  if (!form.specific_labels.empty()) root["label_space"] = "document_specific";
  root["page"] = {{"width", document.page.width}, {"height", document.page.height}};
  if (document.page.image_ref) root["page"]["image"] = *document.page.image_ref;

  std::map<int, std::vector<std::array<int, 2>>> links_by_entity;
  for (const Link& l : form.links) {
    links_by_entity[l.key_id].push_back({l.key_id, l.value_id});
    links_by_entity[l.value_id].push_back({l.key_id, l.value_id});
  }

  json out_form = json::array();
  for (const Entity& e : form.entities) {
    json words = json::array();
    for (int idx : e.token_indices) {
      const Token& t = document.tokens.at(static_cast<std::size_t>(idx));
      json w = {{"text", t.text}, {"box", {t.box.x1, t.box.y1, t.box.x2, t.box.y2}}, {"i", t.index}};
      if (t.ocr_confidence) w["conf"] = *t.ocr_confidence;
      words.push_back(std::move(w));
    }
    auto spec = form.specific_labels.find(e.id);
    auto text = form.text_overrides.find(e.id);
    json linking = json::array();
    if (auto it = links_by_entity.find(e.id); it != links_by_entity.end())
      for (const auto& pair : it->second) linking.push_back(pair);
    out_form.push_back({
        {"id", e.id},
        {"text", text != form.text_overrides.end() ? text->second : e.text},
        {"box", {e.box.x1, e.box.y1, e.box.x2, e.box.y2}},
        {"label", spec != form.specific_labels.end() ? spec->second
                                                     : std::string(funsd_label_name(e.label))},
        {"words", std::move(words)},
        {"linking", std::move(linking)},
    });
  }
  root["form"] = std::move(out_form);
  return root.dump(2, ' ', false, json::error_handler_t::replace);
}

std::string export_funsd(const Document& document, std::span<const Entity> entities,
                         std::span<const Link> links) {
  GoldEntitySet form;
  form.entities.assign(entities.begin(), entities.end());
  form.links.assign(links.begin(), links.end());
  return export_funsd(document, form);
}

}  // namespace docseed
