#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docseed/doc_model.hpp"
#include "docseed/review.hpp"

namespace docseed {

struct PRF {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;

  // Empty-vs-empty scores 1.0; an empty side against a non-empty one scores 0.
  static PRF from_counts(int tp, int fp, int fn);
  PRF& operator+=(const PRF& other);  // micro-average by summing counts
};

// Exact match: same label and identical token set.
PRF entity_prf(std::span<const Entity> predicted, std::span<const Entity> gold);

// Exact pair match. Every id on either side must belong to `shared_entities`,
// else std::invalid_argument.
PRF linking_prf(std::span<const Link> predicted, std::span<const Link> gold,
                std::span<const Entity> shared_entities);

// Renumbers predicted entities into the gold id space: an entity whose token
// set equals a gold entity's takes that id, others get fresh ids above the
// gold maximum. `links` is rewritten accordingly.
struct AlignedEntities {
  std::vector<Entity> entities;
  std::vector<Link> links;
  std::map<int, int> id_map;  // predicted id -> shared id
};
AlignedEntities align_entity_ids(std::span<const Entity> predicted, std::span<const Link> links,
                                 std::span<const Entity> gold);

struct EffortRow {
  std::optional<int> iteration;  // nullopt: documents not exported yet
  int baseline = 0;
  int accepted = 0;
  int edited = 0;
  int rejected = 0;
  int added = 0;
  int pending = 0;

  int reviewed() const { return accepted + edited + rejected + added; }
  std::optional<double> automation_rate() const;
};

struct EffortReport {
  std::vector<EffortRow> rows;
  EffortRow total;

  std::string to_table() const;
  nlohmann::json to_json() const;
};

// `baseline_counts`: auto-generated records per document. `doc_iteration`:
// iteration each exported document belongs to.
EffortReport review_effort(std::span<const ReviewAction> log,
                           const std::map<std::string, int>& baseline_counts,
                           const std::map<std::string, int>& doc_iteration = {});

nlohmann::json to_json(const PRF& prf);

}  // namespace docseed
