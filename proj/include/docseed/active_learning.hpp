#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docseed/classifier.hpp"

namespace docseed {

class ProjectStore;

enum class UncertaintyStrategy { mean_entropy, min_margin };

std::string_view to_string(UncertaintyStrategy s) noexcept;
std::optional<UncertaintyStrategy> parse_uncertainty_strategy(std::string_view name) noexcept;

// Shannon entropy in nats with 0 ln 0 = 0. Throws std::invalid_argument when
// `p` is not a distribution.
double token_entropy(const LabelDistribution& p);

// Higher is more uncertain. mean_entropy: mean token entropy. min_margin:
// 1 - min over tokens of (top1 - top2). Throws std::invalid_argument on empty input.
double doc_uncertainty(std::span<const TokenPrediction> predictions, UncertaintyStrategy strategy);

// Top-k by descending score, ties by ascending doc id.
std::vector<std::string> select_batch(const std::map<std::string, double>& scores, std::size_t k,
                                      const std::set<std::string>& exclude = {});

struct ReviewCounts {
  int accepted = 0;
  int edited = 0;
  int rejected = 0;

  friend bool operator==(const ReviewCounts&, const ReviewCounts&) = default;
};

struct IterationManifest {
  int iteration = 0;
  std::vector<std::string> doc_ids;
  std::string export_path;
  std::string created_at;
  ReviewCounts counts;
  int skipped_annotations = 0;  // records that resolved to no tokens

  friend bool operator==(const IterationManifest&, const IterationManifest&) = default;
};

// Freezes every complete, not yet exported document into iterations/<n>/funsd/
// as FUNSD files with document-specific labels; manifest.json and a metrics
// report go in iterations/<n>/. Throws Error("empty iteration") when nothing qualifies.
IterationManifest export_iteration(ProjectStore& store);

struct QueueItem {
  std::string doc_id;
  double score = 0.0;
};

// Bootstrapped documents that are neither complete nor exported, ranked by
// select_batch over their classifier uncertainty.
std::vector<QueueItem> review_queue(const ProjectStore& store, UncertaintyStrategy strategy, std::size_t k);

}  // namespace docseed
