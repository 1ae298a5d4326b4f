#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "docseed/active_learning.hpp"
#include "docseed/linker.hpp"

namespace docseed {

enum class ClassifierChoice { gold_replay, rule_based, remote };

std::string_view to_string(ClassifierChoice c) noexcept;
std::optional<ClassifierChoice> parse_classifier_choice(std::string_view name) noexcept;

struct ProjectConfig {
  ClassifierChoice classifier = ClassifierChoice::gold_replay;
  std::string endpoint;  // required for remote
  LinkConfig link;
  UncertaintyStrategy strategy = UncertaintyStrategy::mean_entropy;
  std::string docs_dir = "docs";
  std::string iterations_dir = "iterations";

  // Throws Error describing the first problem.
  void validate() const;

  friend bool operator==(const ProjectConfig&, const ProjectConfig&) = default;
};

nlohmann::json config_to_json(const ProjectConfig& config);
// Strict: unknown keys and wrong types are rejected with FormatError.
ProjectConfig config_from_json(const nlohmann::json& j);

}  // namespace docseed
