#include "docseed/config.hpp"

#include <set>

#include "docseed/error.hpp"

namespace docseed {

using nlohmann::json;

std::string_view to_string(ClassifierChoice c) noexcept {
  switch (c) {
    case ClassifierChoice::gold_replay: return "gold_replay";
    case ClassifierChoice::rule_based: return "rule_based";
    case ClassifierChoice::remote: return "remote";
  }
  return "gold_replay";
}

std::optional<ClassifierChoice> parse_classifier_choice(std::string_view name) noexcept {
  for (auto c : {ClassifierChoice::gold_replay, ClassifierChoice::rule_based, ClassifierChoice::remote})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

void ProjectConfig::validate() const {
  if (classifier == ClassifierChoice::remote && endpoint.empty())
    throw Error("remote classifier needs an endpoint");
  try {
    link.validate();
  } catch (const std::invalid_argument& e) {
    throw Error(std::string("link config: ") + e.what());
  }
  auto relative_name = [](const std::string& p) {
    return !p.empty() && p.find("..") == std::string::npos && p.front() != '/';
  };
  if (!relative_name(docs_dir) || !relative_name(iterations_dir))
    throw Error("paths must be non-empty and relative to the project root");
}

json config_to_json(const ProjectConfig& c) {
  json link = {{"vertical_weight", c.link.vertical_weight},
               {"max_link_distance_ratio",
                c.link.max_link_distance_ratio ? json(*c.link.max_link_distance_ratio) : json("unbounded")},
               {"line_overlap", c.link.line_overlap}};
  return {{"classifier", {{"kind", to_string(c.classifier)}, {"endpoint", c.endpoint}}},
          {"link", std::move(link)},
          {"uncertainty", to_string(c.strategy)},
          {"paths", {{"docs", c.docs_dir}, {"iterations", c.iterations_dir}}}};
}

namespace {

void only_keys(const json& j, std::set<std::string> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw FormatError(where + ": unknown key \"" + k + "\"");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where + " must be a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError(where + " must be a string");
  return j.get<std::string>();
}

}  // namespace

ProjectConfig config_from_json(const json& j) {
  ProjectConfig c;
  only_keys(j, {"classifier", "link", "uncertainty", "paths"}, "config");
  if (auto it = j.find("classifier"); it != j.end()) {
    only_keys(*it, {"kind", "endpoint"}, "config.classifier");
    if (auto k = it->find("kind"); k != it->end()) {
      auto choice = parse_classifier_choice(text(*k, "classifier.kind"));
      if (!choice) throw FormatError("unknown classifier kind " + k->dump());
      c.classifier = *choice;
    }
    if (auto e = it->find("endpoint"); e != it->end()) c.endpoint = text(*e, "classifier.endpoint");
  }
  if (auto it = j.find("link"); it != j.end()) {
    only_keys(*it, {"vertical_weight", "max_link_distance_ratio", "line_overlap"}, "config.link");
    if (auto w = it->find("vertical_weight"); w != it->end()) c.link.vertical_weight = number(*w, "vertical_weight");
    if (auto r = it->find("max_link_distance_ratio"); r != it->end()) {
      if (r->is_string() && *r == "unbounded") {
        c.link.max_link_distance_ratio.reset();
      } else {
        c.link.max_link_distance_ratio = number(*r, "max_link_distance_ratio");
      }
    }
    if (auto o = it->find("line_overlap"); o != it->end()) c.link.line_overlap = number(*o, "line_overlap");
  }
  if (auto it = j.find("uncertainty"); it != j.end()) {
    auto s = parse_uncertainty_strategy(text(*it, "uncertainty"));
    if (!s) throw FormatError("unknown uncertainty strategy " + it->dump());
    c.strategy = *s;
  }
  if (auto it = j.find("paths"); it != j.end()) {
    only_keys(*it, {"docs", "iterations"}, "config.paths");
    if (auto d = it->find("docs"); d != it->end()) c.docs_dir = text(*d, "paths.docs");
    if (auto d = it->find("iterations"); d != it->end()) c.iterations_dir = text(*d, "paths.iterations");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace docseed
