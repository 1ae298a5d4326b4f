#pragma once

// Document-specific annotations: values labeled with the normalized text of
// their linked key.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docseed/classifier.hpp"
#include "docseed/doc_model.hpp"
#include "docseed/linker.hpp"

namespace docseed {

// Throws Error("unlabelable key: ...") when nothing survives normalization.
std::string normalize_label(std::string_view raw_key_text);

// Non-throwing variant.
std::optional<std::string> try_normalize_label(std::string_view raw_key_text);

struct LabelEntry {
  std::string label_id;
  std::string display;
  std::set<std::string> raw_variants;
  int count = 0;

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

struct LabelSchema {
  std::vector<LabelEntry> labels;  // sorted by label_id

  const LabelEntry* find(std::string_view label_id) const;
  bool contains(std::string_view label_id) const { return find(label_id) != nullptr; }

  friend bool operator==(const LabelSchema&, const LabelSchema&) = default;
};

struct LinkedDocument {
  std::string doc_id;
  std::vector<Entity> entities;
  LinkResult links;
};

LabelSchema induce_schema(std::span<const LinkedDocument> documents);

// Pairs whose key text normalizes to nothing are dissolved: the value moves to
// dropped_values, the key to unlinked_keys.
LinkResult drop_unlabelable_pairs(std::span<const Entity> entities, LinkResult links);

enum class AnnotationStatus { automatic, accepted, edited, rejected };

std::string_view to_string(AnnotationStatus status) noexcept;
std::optional<AnnotationStatus> parse_annotation_status(std::string_view name) noexcept;

struct AnnotationRecord {
  std::string annotation_id;
  std::string label_id;
  std::string value_text;
  BBox value_box;
  std::optional<int> source_key_entity;
  std::optional<int> source_value_entity;
  double confidence = 1.0;
  AnnotationStatus status = AnnotationStatus::automatic;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

std::string make_annotation_id(std::string_view doc_id, std::size_t ordinal);

// One record per pair, ids "<doc_id>:<n>" in pair order. Throws Error when a
// pair's label is missing from the schema.
std::vector<AnnotationRecord> generate_annotations(const Document& document,
                                                   std::span<const Entity> entities,
                                                   const LinkResult& links,
                                                   const LabelSchema& schema,
                                                   std::span<const TokenPrediction> predictions);

}  // namespace docseed
