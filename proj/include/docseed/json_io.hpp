#pragma once

// JSON mappings for the persisted and wire-visible types.

#include <json.hpp>

#include "docseed/active_learning.hpp"
#include "docseed/annotation.hpp"
#include "docseed/classifier.hpp"
#include "docseed/doc_model.hpp"
#include "docseed/ingest.hpp"
#include "docseed/linker.hpp"
#include "docseed/review.hpp"
#include "docseed/store.hpp"

namespace docseed {

using nlohmann::json;

void to_json(json& j, const BBox& b);
void from_json(const json& j, BBox& b);
void to_json(json& j, const Token& t);
void from_json(const json& j, Token& t);
void to_json(json& j, const Page& p);
void from_json(const json& j, Page& p);
void to_json(json& j, const Document& d);
void from_json(const json& j, Document& d);
void to_json(json& j, const Entity& e);
void from_json(const json& j, Entity& e);
void to_json(json& j, const Link& l);
void from_json(const json& j, Link& l);
void to_json(json& j, const GoldEntitySet& g);
void from_json(const json& j, GoldEntitySet& g);
void to_json(json& j, const TokenPrediction& p);
void from_json(const json& j, TokenPrediction& p);
void to_json(json& j, const LinkResult& r);
void from_json(const json& j, LinkResult& r);
void to_json(json& j, const LabelEntry& e);
void from_json(const json& j, LabelEntry& e);
void to_json(json& j, const LabelSchema& s);
void from_json(const json& j, LabelSchema& s);
void to_json(json& j, const AnnotationRecord& r);
void from_json(const json& j, AnnotationRecord& r);
void to_json(json& j, const AnnotationSet& s);
void from_json(const json& j, AnnotationSet& s);
void to_json(json& j, const ReviewAction& a);
void from_json(const json& j, ReviewAction& a);
void to_json(json& j, const IterationManifest& m);
void from_json(const json& j, IterationManifest& m);
void to_json(json& j, const BootstrapRecord& r);
void from_json(const json& j, BootstrapRecord& r);

// Per-document annotation export:
// {"doc_id", "schema_version", "annotations": [{"id", "label", "text", "box",
//  "status", "confidence", "key_entity", "value_entity"}]}
json annotation_file(const std::string& doc_id, int schema_version, const AnnotationSet& set);
AnnotationSet annotations_from_file(const json& j);

// Wire form of a prediction's confidence map.
json distribution_to_json(const LabelDistribution& p);

}  // namespace docseed
