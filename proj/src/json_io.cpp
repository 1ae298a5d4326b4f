#include "docseed/json_io.hpp"

#include "docseed/error.hpp"

namespace docseed {

namespace {

template <class T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing \"") + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad \"") + key + "\": " + e.what());
  }
}

GenericLabel label_from(const json& j) {
  auto label = parse_generic_label(j.get<std::string>());
  if (!label) throw FormatError("unknown label " + j.dump());
  return *label;
}

}  // namespace

void to_json(json& j, const BBox& b) { j = json::array({b.x1, b.y1, b.x2, b.y2}); }

void from_json(const json& j, BBox& b) {
  if (!j.is_array() || j.size() != 4) throw FormatError("box must be [x1,y1,x2,y2]");
  b = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

void to_json(json& j, const Token& t) {
  j = {{"i", t.index}, {"text", t.text}, {"box", t.box}};
  if (t.ocr_confidence) j["conf"] = *t.ocr_confidence;
}

void from_json(const json& j, Token& t) {
  t.index = required<int>(j, "i");
  t.text = required<std::string>(j, "text");
  t.box = required<BBox>(j, "box");
  t.ocr_confidence.reset();
  if (auto it = j.find("conf"); it != j.end() && !it->is_null()) t.ocr_confidence = it->get<double>();
}

void to_json(json& j, const Page& p) {
  j = {{"width", p.width}, {"height", p.height}};
  if (p.image_ref) j["image"] = *p.image_ref;
}

void from_json(const json& j, Page& p) {
  p.width = required<int>(j, "width");
  p.height = required<int>(j, "height");
  p.image_ref.reset();
  if (auto it = j.find("image"); it != j.end() && it->is_string()) p.image_ref = it->get<std::string>();
}

void to_json(json& j, const Document& d) {
  j = {{"doc_id", d.doc_id}, {"page", d.page}, {"tokens", d.tokens}};
}

void from_json(const json& j, Document& d) {
  d.doc_id = required<std::string>(j, "doc_id");
  d.page = required<Page>(j, "page");
  d.tokens = required<std::vector<Token>>(j, "tokens");
}

void to_json(json& j, const Entity& e) {
  j = {{"id", e.id}, {"label", to_string(e.label)}, {"tokens", e.token_indices}, {"text", e.text}, {"box", e.box}};
}

void from_json(const json& j, Entity& e) {
  e.id = required<int>(j, "id");
  e.label = label_from(required<json>(j, "label"));
  e.token_indices = required<std::vector<int>>(j, "tokens");
  e.text = required<std::string>(j, "text");
  e.box = required<BBox>(j, "box");
}

void to_json(json& j, const Link& l) { j = json::array({l.key_id, l.value_id}); }

void from_json(const json& j, Link& l) {
  if (!j.is_array() || j.size() != 2) throw FormatError("link must be [key_id, value_id]");
  l = {j[0].get<int>(), j[1].get<int>()};
}

void to_json(json& j, const GoldEntitySet& g) {
  json specific = json::object();
  for (const auto& [id, label] : g.specific_labels) specific[std::to_string(id)] = label;
  json overrides = json::object();
  for (const auto& [id, text] : g.text_overrides) overrides[std::to_string(id)] = text;
  j = {{"entities", g.entities}, {"links", g.links}, {"specific_labels", specific}, {"text_overrides", overrides}};
}

void from_json(const json& j, GoldEntitySet& g) {
  g.entities = required<std::vector<Entity>>(j, "entities");
  g.links = required<std::vector<Link>>(j, "links");
  g.specific_labels.clear();
  g.text_overrides.clear();
  if (auto it = j.find("specific_labels"); it != j.end())
    for (const auto& [k, v] : it->items()) g.specific_labels[std::stoi(k)] = v.get<std::string>();
  if (auto it = j.find("text_overrides"); it != j.end())
    for (const auto& [k, v] : it->items()) g.text_overrides[std::stoi(k)] = v.get<std::string>();
}

json distribution_to_json(const LabelDistribution& p) {
  json j = json::object();
  for (GenericLabel g : kGenericLabels) j[std::string(to_string(g))] = p[static_cast<std::size_t>(g)];
  return j;
}

void to_json(json& j, const TokenPrediction& p) {
  j = {{"i", p.token_index},
       {"label", to_string(p.label)},
       {"tag", p.tag == BoundaryTag::B ? "B" : "I"},
       {"confidence", distribution_to_json(p.confidence)}};
}

void from_json(const json& j, TokenPrediction& p) {
  p.token_index = required<int>(j, "i");
  p.label = label_from(required<json>(j, "label"));
  const auto tag = required<std::string>(j, "tag");
  if (tag != "B" && tag != "I") throw FormatError("tag must be B or I");
  p.tag = tag == "B" ? BoundaryTag::B : BoundaryTag::I;
  const json conf = required<json>(j, "confidence");
  for (GenericLabel g : kGenericLabels) p.confidence[static_cast<std::size_t>(g)] = required<double>(conf, std::string(to_string(g)).c_str());
}

void to_json(json& j, const LinkResult& r) {
  j = {{"pairs", r.pairs}, {"dropped_values", r.dropped_values}, {"unlinked_keys", r.unlinked_keys}};
}

void from_json(const json& j, LinkResult& r) {
  r.pairs = required<std::vector<Link>>(j, "pairs");
  r.dropped_values = required<std::vector<int>>(j, "dropped_values");
  r.unlinked_keys = required<std::vector<int>>(j, "unlinked_keys");
}

void to_json(json& j, const LabelEntry& e) {
  j = {{"label_id", e.label_id}, {"display", e.display}, {"raw_variants", e.raw_variants}, {"count", e.count}};
}

void from_json(const json& j, LabelEntry& e) {
  e.label_id = required<std::string>(j, "label_id");
  e.display = required<std::string>(j, "display");
  e.raw_variants = required<std::set<std::string>>(j, "raw_variants");
  e.count = required<int>(j, "count");
}

void to_json(json& j, const LabelSchema& s) { j = {{"labels", s.labels}}; }

void from_json(const json& j, LabelSchema& s) {
  s.labels = required<std::vector<LabelEntry>>(j, "labels");
  std::sort(s.labels.begin(), s.labels.end(),
            [](const LabelEntry& a, const LabelEntry& b) { return a.label_id < b.label_id; });
}

void to_json(json& j, const AnnotationRecord& r) {
  j = {{"id", r.annotation_id},
       {"label", r.label_id},
       {"text", r.value_text},
       {"box", r.value_box},
       {"status", to_string(r.status)},
       {"confidence", r.confidence},
       {"key_entity", r.source_key_entity ? json(*r.source_key_entity) : json(nullptr)},
       {"value_entity", r.source_value_entity ? json(*r.source_value_entity) : json(nullptr)}};
}

void from_json(const json& j, AnnotationRecord& r) {
  r.annotation_id = required<std::string>(j, "id");
  r.label_id = required<std::string>(j, "label");
  r.value_text = required<std::string>(j, "text");
  r.value_box = required<BBox>(j, "box");
  auto status = parse_annotation_status(required<std::string>(j, "status"));
  if (!status) throw FormatError("unknown annotation status");
  r.status = *status;
  r.confidence = required<double>(j, "confidence");
  r.source_key_entity.reset();
  r.source_value_entity.reset();
  if (auto it = j.find("key_entity"); it != j.end() && !it->is_null()) r.source_key_entity = it->get<int>();
  if (auto it = j.find("value_entity"); it != j.end() && !it->is_null()) r.source_value_entity = it->get<int>();
}

void to_json(json& j, const AnnotationSet& s) { j = s.records; }

void from_json(const json& j, AnnotationSet& s) { s.records = j.get<std::vector<AnnotationRecord>>(); }

void to_json(json& j, const ReviewAction& a) {
  j = {{"action_id", a.action_id},
       {"doc_id", a.doc_id},
       {"kind", to_string(a.kind)},
       {"payload", a.payload},
       {"actor", a.actor},
       {"timestamp", a.timestamp}};
  if (a.annotation_id) j["annotation_id"] = *a.annotation_id;
}

void from_json(const json& j, ReviewAction& a) {
  if (!j.is_object()) throw FormatError("action must be an object");
  a.action_id = j.value("action_id", std::int64_t{0});
  a.doc_id = j.value("doc_id", std::string());
  auto kind = parse_action_kind(required<std::string>(j, "kind"));
  if (!kind) throw FormatError("unknown action kind");
  a.kind = *kind;
  a.annotation_id.reset();
  if (auto it = j.find("annotation_id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError("annotation_id must be a string");
    a.annotation_id = it->get<std::string>();
  }
  a.payload = j.value("payload", json::object());
  if (!a.payload.is_object()) throw FormatError("payload must be an object");
  a.actor = j.value("actor", std::string());
  a.timestamp = j.value("timestamp", std::string());
}

void to_json(json& j, const IterationManifest& m) {
  j = {{"iteration", m.iteration},
       {"doc_ids", m.doc_ids},
       {"export_path", m.export_path},
       {"created_at", m.created_at},
       {"counts", {{"accepted", m.counts.accepted}, {"edited", m.counts.edited}, {"rejected", m.counts.rejected}}},
       {"skipped_annotations", m.skipped_annotations}};
}

void from_json(const json& j, IterationManifest& m) {
  m.iteration = required<int>(j, "iteration");
  m.doc_ids = required<std::vector<std::string>>(j, "doc_ids");
  m.export_path = required<std::string>(j, "export_path");
  m.created_at = required<std::string>(j, "created_at");
  const json counts = required<json>(j, "counts");
  m.counts = {required<int>(counts, "accepted"), required<int>(counts, "edited"), required<int>(counts, "rejected")};
  m.skipped_annotations = j.value("skipped_annotations", 0);
}

void to_json(json& j, const BootstrapRecord& r) {
  j = {{"classifier", r.classifier}, {"predictions", r.predictions}, {"entities", r.entities}, {"links", r.links}};
}

void from_json(const json& j, BootstrapRecord& r) {
  r.classifier = required<std::string>(j, "classifier");
  r.predictions = required<std::vector<TokenPrediction>>(j, "predictions");
  r.entities = required<std::vector<Entity>>(j, "entities");
  r.links = required<LinkResult>(j, "links");
}

json annotation_file(const std::string& doc_id, int schema_version, const AnnotationSet& set) {
  return {{"doc_id", doc_id}, {"schema_version", schema_version}, {"annotations", set.records}};
}

AnnotationSet annotations_from_file(const json& j) {
  AnnotationSet set;
  set.records = required<std::vector<AnnotationRecord>>(j, "annotations");
  return set;
}

}  // namespace docseed
