#pragma once

// File-backed project store.
//
//   <root>/project.json                 config, label schema, schema version
//   <root>/audit.log                    one ReviewAction per line, append-only
//   <root>/<docs>/<id>/ocr.json         Document
//   <root>/<docs>/<id>/gold.json        GoldEntitySet (FUNSD ingest only)
//   <root>/<docs>/<id>/entities.json    predictions, entities, links
//   <root>/<docs>/<id>/baseline.json    auto-generated annotations
//   <root>/<docs>/<id>/annotations.json materialized review state
//   <root>/<docs>/<id>/image.<ext>      page image, when one was ingested
//   <root>/<iterations>/<n>/            manifest.json, metrics, funsd/ export
//
// annotations.json always equals replay(baseline, audit.log restricted to the
// document); open() re-materializes any document where it does not.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docseed/active_learning.hpp"
#include "docseed/annotation.hpp"
#include "docseed/classifier.hpp"
#include "docseed/config.hpp"
#include "docseed/ingest.hpp"
#include "docseed/linker.hpp"
#include "docseed/review.hpp"

namespace docseed {

struct BootstrapRecord {
  std::string classifier;
  std::vector<TokenPrediction> predictions;
  std::vector<Entity> entities;
  LinkResult links;

  friend bool operator==(const BootstrapRecord&, const BootstrapRecord&) = default;
};

struct StoreOptions {
  // Test hook: terminate the process right after an action reaches audit.log,
  // before annotations.json is rewritten.
  bool crash_after_append = false;
};

class ProjectStore {
 public:
  static ProjectStore create(const std::filesystem::path& root, const ProjectConfig& config);
  static ProjectStore open(const std::filesystem::path& root, StoreOptions options = {});

  ProjectStore(ProjectStore&&) noexcept;
  ProjectStore& operator=(ProjectStore&&) noexcept;
  ~ProjectStore();

  const std::filesystem::path& root() const;
  const ProjectConfig& config() const;

  std::vector<std::string> doc_ids() const;
  bool has_document(const std::string& doc_id) const;

  // Returns false (and leaves the store untouched) if the id already exists.
  bool put_document(const Document& document, const std::optional<GoldEntitySet>& gold = std::nullopt,
                    const std::optional<std::filesystem::path>& image = std::nullopt);

  Document document(const std::string& doc_id) const;
  std::optional<GoldEntitySet> gold(const std::string& doc_id) const;
  std::optional<std::filesystem::path> image_path(const std::string& doc_id) const;

  std::optional<BootstrapRecord> bootstrap_record(const std::string& doc_id) const;
  // Replaces bootstrap output and baseline. Refused once review actions exist
  // for the document, since they refer to the old baseline.
  void put_bootstrap(const std::string& doc_id, const BootstrapRecord& record,
                     const AnnotationSet& baseline);
  std::optional<AnnotationSet> baseline(const std::string& doc_id) const;

  // Last committed state (snapshot read).
  AnnotationSet annotations(const std::string& doc_id) const;

  // Validates against current state, assigns action_id and timestamp, appends
  // to audit.log, then materializes. Writes to one document are serialized.
  ReviewAction commit(ReviewAction draft);

  std::vector<ReviewAction> audit_log() const;
  std::vector<ReviewAction> audit_log(const std::string& doc_id) const;

  LabelSchema schema() const;
  int schema_version() const;
  // Bumps the version when the schema changes.
  void set_schema(const LabelSchema& schema);

  std::vector<IterationManifest> iterations() const;
  std::filesystem::path iteration_dir(int iteration) const;
  // Runs `fn` while holding the project lock exclusively (no commits in flight).
  void with_exclusive_lock(const std::function<void()>& fn);
  void record_iteration(const IterationManifest& manifest);

 private:
  struct Impl;
  explicit ProjectStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace docseed
