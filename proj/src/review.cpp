#include "docseed/review.hpp"

#include <algorithm>

#include "docseed/error.hpp"

namespace docseed {

using nlohmann::json;

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::accept: return "accept";
    case ActionKind::reject: return "reject";
    case ActionKind::edit_label: return "edit_label";
    case ActionKind::edit_box: return "edit_box";
    case ActionKind::edit_text: return "edit_text";
    case ActionKind::relink: return "relink";
    case ActionKind::add: return "add";
  }
  return "accept";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) noexcept {
  for (auto k : {ActionKind::accept, ActionKind::reject, ActionKind::edit_label, ActionKind::edit_box,
                 ActionKind::edit_text, ActionKind::relink, ActionKind::add})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

const AnnotationRecord* AnnotationSet::find(std::string_view annotation_id) const {
  for (const AnnotationRecord& r : records)
    if (r.annotation_id == annotation_id) return &r;
  return nullptr;
}

bool AnnotationSet::complete() const {
  return !records.empty() && std::none_of(records.begin(), records.end(), [](const AnnotationRecord& r) {
    return r.status == AnnotationStatus::automatic;
  });
}

namespace {

const json& field(const ReviewAction& a, const char* name) {
  auto it = a.payload.find(name);
  if (it == a.payload.end())
    throw FormatError(std::string(to_string(a.kind)) + " payload needs \"" + name + "\"");
  return *it;
}

std::string string_field(const ReviewAction& a, const char* name) {
  const json& v = field(a, name);
  if (!v.is_string()) throw FormatError(std::string(to_string(a.kind)) + " \"" + name + "\" must be a string");
  return v.get<std::string>();
}

BBox box_field(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); }))
    throw FormatError(what + " must be [x1,y1,x2,y2] integers");
  BBox b{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
  if (!b.valid()) throw FormatError(what + " is not a valid box");
  return b;
}

std::string valid_label(const std::string& label, const std::string& what) {
  auto normalized = try_normalize_label(label);
  if (!normalized || *normalized != label) throw FormatError(what + " \"" + label + "\" is not a normalized label id");
  return label;
}

void require_editable(const AnnotationRecord& r, ActionKind kind) {
  if (r.status != AnnotationStatus::automatic && r.status != AnnotationStatus::edited)
    throw InvalidTransitionError(std::string(to_string(kind)) + " not allowed on " +
                                 std::string(to_string(r.status)) + " annotation " + r.annotation_id);
}

template <class T>
void check_old(const T& current, const T& old, const std::string& what) {
  if (!(current == old)) throw ConflictError(what + " changed since the action was drafted");
}

}  // namespace

AnnotationSet apply_action(AnnotationSet state, const ReviewAction& action) {
  if (!action.payload.is_object()) throw FormatError("action payload must be an object");

  if (action.kind == ActionKind::add) {
    if (action.annotation_id) throw FormatError("add actions carry the new record in the payload, not annotation_id");
    const json& a = field(action, "annotation");
    if (!a.is_object()) throw FormatError("add \"annotation\" must be an object");
    AnnotationRecord r;
    if (!a.contains("id") || !a["id"].is_string() || a["id"].get<std::string>().empty())
      throw FormatError("added annotation needs a string id");
    r.annotation_id = a["id"].get<std::string>();
    if (state.find(r.annotation_id)) throw ConflictError("annotation " + r.annotation_id + " already exists");
    if (!a.contains("label") || !a["label"].is_string()) throw FormatError("added annotation needs a label");
    r.label_id = valid_label(a["label"].get<std::string>(), "label");
    if (!a.contains("text") || !a["text"].is_string()) throw FormatError("added annotation needs text");
    r.value_text = a["text"].get<std::string>();
    r.value_box = box_field(a.value("box", json()), "box");
    r.confidence = 1.0;
    r.status = AnnotationStatus::edited;
    state.records.push_back(std::move(r));
    return state;
  }

  if (!action.annotation_id) throw FormatError(std::string(to_string(action.kind)) + " needs annotation_id");
  auto it = std::find_if(state.records.begin(), state.records.end(),
                         [&](const AnnotationRecord& r) { return r.annotation_id == *action.annotation_id; });
  if (it == state.records.end()) throw NotFoundError("unknown annotation " + *action.annotation_id);
  AnnotationRecord& r = *it;

  if (auto exp = action.payload.find("expected_status"); exp != action.payload.end()) {
    if (!exp->is_string() || !parse_annotation_status(exp->get<std::string>()))
      throw FormatError("expected_status must name a status");
    if (exp->get<std::string>() != to_string(r.status))
      throw ConflictError("annotation " + r.annotation_id + " is " + std::string(to_string(r.status)) +
                          ", expected " + exp->get<std::string>());
  }

  switch (action.kind) {
    case ActionKind::accept:
    case ActionKind::reject: {
      const AnnotationStatus target =
          action.kind == ActionKind::accept ? AnnotationStatus::accepted : AnnotationStatus::rejected;
      // Same verdict twice: another reviewer got there first.
      if (r.status == target)
        throw ConflictError("annotation " + r.annotation_id + " is already " + std::string(to_string(target)));
      if (r.status != AnnotationStatus::automatic)
        throw InvalidTransitionError(std::string(to_string(action.kind)) + " not allowed on " +
                                     std::string(to_string(r.status)) + " annotation " + r.annotation_id);
      r.status = target;
      break;
    }
    case ActionKind::edit_label:
    case ActionKind::relink: {
      require_editable(r, action.kind);
      const std::string old_label = string_field(action, "old");
      const std::string new_label = valid_label(string_field(action, "new"), "new label");
      check_old(r.label_id, old_label, "label");
      if (action.kind == ActionKind::relink) {
        if (auto o = action.payload.find("old_key_entity"); o != action.payload.end()) {
          if (!o->is_number_integer()) throw FormatError("old_key_entity must be an integer");
          check_old(r.source_key_entity, std::optional<int>(o->get<int>()), "key entity");
        }
        if (auto n = action.payload.find("new_key_entity"); n != action.payload.end()) {
          if (!n->is_number_integer()) throw FormatError("new_key_entity must be an integer");
          r.source_key_entity = n->get<int>();
        }
      }
      r.label_id = new_label;
      r.status = AnnotationStatus::edited;
      break;
    }
    case ActionKind::edit_box: {
      require_editable(r, action.kind);
      const BBox old_box = box_field(field(action, "old"), "old box");
      const BBox new_box = box_field(field(action, "new"), "new box");
      check_old(r.value_box, old_box, "box");
      r.value_box = new_box;
      r.status = AnnotationStatus::edited;
      break;
    }
    case ActionKind::edit_text: {
      require_editable(r, action.kind);
      const std::string old_text = string_field(action, "old");
      const std::string new_text = string_field(action, "new");
      if (trim(new_text).empty()) throw FormatError("new text must not be blank");
      check_old(r.value_text, old_text, "text");
      r.value_text = new_text;
      r.status = AnnotationStatus::edited;
      break;
    }
    case ActionKind::add:
      break;
  }
  return state;
}

AnnotationSet replay(AnnotationSet baseline, std::span<const ReviewAction> log) {
  std::int64_t previous = 0;
  for (const ReviewAction& a : log) {
    if (a.action_id <= previous) throw ReplayError(a.action_id, "log is not ordered by action_id");
    previous = a.action_id;
    try {
      baseline = apply_action(std::move(baseline), a);
    } catch (const Error& e) {
      throw ReplayError(a.action_id, e.what());
    }
  }
  return baseline;
}

}  // namespace docseed
