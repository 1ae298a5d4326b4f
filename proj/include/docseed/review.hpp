#pragma once

// Review actions and their event-sourced application to annotation state.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docseed/annotation.hpp"

namespace docseed {

enum class ActionKind { accept, reject, edit_label, edit_box, edit_text, relink, add };

std::string_view to_string(ActionKind kind) noexcept;
std::optional<ActionKind> parse_action_kind(std::string_view name) noexcept;

// Payloads by kind:
//   accept, reject   {}
//   edit_label       {"old": label, "new": label}
//   edit_box         {"old": [x1,y1,x2,y2], "new": [x1,y1,x2,y2]}
//   edit_text        {"old": text, "new": text}
//   relink           {"old": label, "new": label, "old_key_entity"?: id, "new_key_entity"?: id}
//   add              {"annotation": {"id", "label", "text", "box"}}
// Any payload may carry "expected_status"; a mismatch is a conflict.
struct ReviewAction {
  std::int64_t action_id = 0;
  std::string doc_id;
  std::optional<std::string> annotation_id;
  ActionKind kind = ActionKind::accept;
  nlohmann::json payload = nlohmann::json::object();
  std::string actor;
  std::string timestamp;

  friend bool operator==(const ReviewAction&, const ReviewAction&) = default;
};

struct AnnotationSet {
  std::vector<AnnotationRecord> records;

  const AnnotationRecord* find(std::string_view annotation_id) const;
  bool complete() const;  // at least one record and none still automatic

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Throws NotFoundError, InvalidTransitionError, ConflictError, or FormatError
// for a malformed payload.
AnnotationSet apply_action(AnnotationSet state, const ReviewAction& action);

// Left fold of apply_action. Throws ReplayError naming the failing action.
AnnotationSet replay(AnnotationSet baseline, std::span<const ReviewAction> log);

}  // namespace docseed
