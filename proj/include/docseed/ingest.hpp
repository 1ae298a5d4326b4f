#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docseed/doc_model.hpp"

namespace docseed {

// Entities and key->value links read from a FUNSD-format file.
struct GoldEntitySet {
  std::vector<Entity> entities;  // form order
  std::vector<Link> links;       // sorted, deduplicated, key -> value
  // Entity id -> document-specific label (iteration exports only).
  std::map<int, std::string> specific_labels;
  // Entity id -> FUNSD "text" when it differs from the joined word texts.
  std::map<int, std::string> text_overrides;

  const Entity* find(int entity_id) const;

  friend bool operator==(const GoldEntitySet&, const GoldEntitySet&) = default;
};

// Tesseract TSV (`tesseract img out tsv`). Exactly one page is accepted; use
// parse_ocr_tsv_pages for multi-page output.
Document parse_ocr_tsv(std::string_view content, const std::string& doc_id = {});

// One Document per page. Multi-page input yields ids "<doc_id>-p<page_num>".
std::vector<Document> parse_ocr_tsv_pages(std::string_view content, const std::string& doc_id);

std::pair<Document, GoldEntitySet> parse_funsd(std::string_view content, const std::string& doc_id);

// Adds one "other" entity (fresh id) per contiguous run of token indices not
// covered by `form`. export_funsd writes exactly this completed form.
GoldEntitySet with_fill_entities(const Document& document, GoldEntitySet form);

// Tokens not covered by any entity are written as extra "other" entities so
// the file carries every word.
std::string export_funsd(const Document& document, const GoldEntitySet& form);
std::string export_funsd(const Document& document, std::span<const Entity> entities,
                         std::span<const Link> links);

}  // namespace docseed
