#pragma once

// Key-value linking over generic entities.
//
// Values are visited in reading order. Each value takes the nearest key that
// precedes it in reading order and has not been claimed by an earlier value;
// a value with no such key is dropped. Keys left over are reported unlinked.

#include <optional>
#include <span>
#include <vector>

#include "docseed/doc_model.hpp"

namespace docseed {

struct LinkConfig {
  double vertical_weight = 1.0;
  // Fraction of the page diagonal; nullopt means unbounded.
  std::optional<double> max_link_distance_ratio = 0.5;
  double line_overlap = kDefaultLineOverlap;

  // Throws std::invalid_argument on a non-positive weight or a ratio outside (0,1].
  void validate() const;
  std::optional<double> max_distance(const Page& page) const;

  friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

struct LinkResult {
  std::vector<Link> pairs;           // in value processing order
  std::vector<int> dropped_values;   // in value processing order
  std::vector<int> unlinked_keys;    // in key reading order

  friend bool operator==(const LinkResult&, const LinkResult&) = default;
};

LinkResult link(std::span<const Entity> entities, const Page& page, const LinkConfig& config = {});

// Straight-line simulation of the same procedure, written without any of the
// geometry helpers `link` uses. Quadratic-to-cubic; meant for small inputs in
// equivalence testing.
LinkResult link_oracle(std::span<const Entity> entities, const Page& page,
                       const LinkConfig& config = {});

}  // namespace docseed
