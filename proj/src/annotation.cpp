#include "docseed/annotation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "docseed/error.hpp"

namespace docseed {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Non-ASCII bytes count as word characters so UTF-8 labels survive.
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_trailing_punct(char c) { return c == ':' || c == '#' || c == '-' || c == '.'; }

}  // namespace

std::optional<std::string> try_normalize_label(std::string_view raw) {
  std::string s = trim(raw);
  while (!s.empty() && (is_trailing_punct(s.back()) || is_space(s.back()))) s.pop_back();

  std::string out;
  out.reserve(s.size());
  bool pending_sep = false;
  for (char c : s) {
    if (is_word_char(c)) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    } else {
      pending_sep = true;
    }
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string normalize_label(std::string_view raw) {
  auto label = try_normalize_label(raw);
  if (!label) throw Error("unlabelable key: \"" + std::string(raw) + "\"");
  return *label;
}

const LabelEntry* LabelSchema::find(std::string_view label_id) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), label_id,
                             [](const LabelEntry& e, std::string_view id) { return e.label_id < id; });
  if (it != labels.end() && it->label_id == label_id) return &*it;
  return nullptr;
}

LabelSchema induce_schema(std::span<const LinkedDocument> documents) {
  std::map<std::string, std::map<std::string, int>> variants;  // label -> raw text -> count
  for (const LinkedDocument& doc : documents) {
    std::map<int, const Entity*> by_id;
    for (const Entity& e : doc.entities) by_id[e.id] = &e;
    for (const Link& pair : doc.links.pairs) {
      auto it = by_id.find(pair.key_id);
      if (it == by_id.end())
        throw std::invalid_argument(doc.doc_id + ": link names unknown key entity " + std::to_string(pair.key_id));
      const std::string& raw = it->second->text;
      auto label = try_normalize_label(raw);
      if (!label) continue;
      ++variants[*label][raw];
    }
  }
  LabelSchema schema;
  for (auto& [label, raw_counts] : variants) {
    LabelEntry entry{label, {}, {}, 0};
    int best = -1;
    for (const auto& [raw, count] : raw_counts) {  // ascending raw text, so ties keep the smallest
      entry.raw_variants.insert(raw);
      entry.count += count;
      if (count > best) {
        best = count;
        entry.display = raw;
      }
    }
    schema.labels.push_back(std::move(entry));
  }
  return schema;
}

LinkResult drop_unlabelable_pairs(std::span<const Entity> entities, LinkResult links) {
  std::map<int, const Entity*> by_id;
  for (const Entity& e : entities) by_id[e.id] = &e;
  LinkResult out;
  out.dropped_values = links.dropped_values;
  out.unlinked_keys = links.unlinked_keys;
  for (const Link& pair : links.pairs) {
    auto it = by_id.find(pair.key_id);
    if (it != by_id.end() && try_normalize_label(it->second->text)) {
      out.pairs.push_back(pair);
    } else {
      out.dropped_values.push_back(pair.value_id);
      out.unlinked_keys.push_back(pair.key_id);
    }
  }
  return out;
}

std::string_view to_string(AnnotationStatus status) noexcept {
  switch (status) {
    case AnnotationStatus::automatic: return "auto";
    case AnnotationStatus::accepted: return "accepted";
    case AnnotationStatus::edited: return "edited";
    case AnnotationStatus::rejected: return "rejected";
  }
  return "auto";
}

std::optional<AnnotationStatus> parse_annotation_status(std::string_view name) noexcept {
  for (auto s : {AnnotationStatus::automatic, AnnotationStatus::accepted, AnnotationStatus::edited,
                 AnnotationStatus::rejected})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string make_annotation_id(std::string_view doc_id, std::size_t ordinal) {
  return std::string(doc_id) + ":" + std::to_string(ordinal);
}

std::vector<AnnotationRecord> generate_annotations(const Document& document, std::span<const Entity> entities,
                                                   const LinkResult& links, const LabelSchema& schema,
                                                   std::span<const TokenPrediction> predictions) {
  std::map<int, const Entity*> by_id;
  for (const Entity& e : entities) by_id[e.id] = &e;
  std::vector<const TokenPrediction*> by_token(document.tokens.size(), nullptr);
  for (const TokenPrediction& p : predictions)
    if (p.token_index >= 0 && static_cast<std::size_t>(p.token_index) < by_token.size())
      by_token[static_cast<std::size_t>(p.token_index)] = &p;

  std::vector<std::string> missing;
  std::vector<AnnotationRecord> records;
  records.reserve(links.pairs.size());
  for (const Link& pair : links.pairs) {
    auto key = by_id.find(pair.key_id);
    auto value = by_id.find(pair.value_id);
    if (key == by_id.end() || value == by_id.end())
      throw std::invalid_argument("link result references an unknown entity");
    const std::string label = normalize_label(key->second->text);
    if (!schema.contains(label)) {
      missing.push_back(label);
      continue;
    }
    double confidence = 1.0;
    for (int idx : value->second->token_indices) {
      const TokenPrediction* p = by_token.at(static_cast<std::size_t>(idx));
      if (!p) throw std::invalid_argument("no prediction for token " + std::to_string(idx));
      confidence = std::min(confidence, p->confidence_of(p->label));
    }
    AnnotationRecord record;
    record.annotation_id = make_annotation_id(document.doc_id, records.size());
    record.label_id = label;
    record.value_text = value->second->text;
    record.value_box = value->second->box;
    record.source_key_entity = pair.key_id;
    record.source_value_entity = pair.value_id;
    record.confidence = confidence;
    record.status = AnnotationStatus::automatic;
    records.push_back(std::move(record));
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error("schema is missing labels: " + list);
  }
  return records;
}

}  // namespace docseed
