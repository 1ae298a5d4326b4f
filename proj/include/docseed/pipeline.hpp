#pragma once

// Batch orchestration used by the CLI: bootstrap and scoring.

#include <string>
#include <vector>

#include <json.hpp>

#include "docseed/classifier.hpp"
#include "docseed/config.hpp"
#include "docseed/linker.hpp"
#include "docseed/metrics.hpp"

namespace docseed {

class ProjectStore;

struct DocumentAnalysis {
  std::vector<TokenPrediction> predictions;
  std::vector<Entity> entities;
  LinkResult links;
};

// classify -> aggregate_entities -> link -> dissolve unlabelable pairs.
DocumentAnalysis analyze_document(const Document& document, const ClassifierKind& kind,
                                  const LinkConfig& link_config);

struct BootstrapSummary {
  std::vector<std::string> processed;
  std::vector<std::string> skipped;
  std::size_t annotations = 0;
};

// Runs analyze_document on every document lacking annotations (all of them
// with `force`, except documents already under review), re-induces the label
// schema over the whole project and writes baselines.
BootstrapSummary bootstrap_project(ProjectStore& store, const ProjectConfig& config, bool force,
                                   unsigned jobs);

struct ScoreReport {
  int documents = 0;
  PRF entities;
  PRF linking;            // heuristic linker over predicted entities
  PRF linking_on_gold;    // heuristic linker over gold entities
  std::vector<std::string> doc_ids;

  std::string to_table() const;
  nlohmann::json to_json() const;
};

// Micro-averaged scores over the listed documents that carry gold data.
// Throws Error when none do.
ScoreReport score_documents(const ProjectStore& store, const std::vector<std::string>& doc_ids);
ScoreReport score_project(const ProjectStore& store);

}  // namespace docseed
