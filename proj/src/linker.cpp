#include "docseed/linker.hpp"

#include <limits>
#include <map>
#include <stdexcept>

namespace docseed {

void LinkConfig::validate() const {
  if (!(vertical_weight > 0.0)) throw std::invalid_argument("vertical_weight must be positive");
  if (max_link_distance_ratio && !(*max_link_distance_ratio > 0.0 && *max_link_distance_ratio <= 1.0))
    throw std::invalid_argument("max_link_distance_ratio must lie in (0,1]");
  if (!(line_overlap > 0.0 && line_overlap <= 1.0))
    throw std::invalid_argument("line_overlap must lie in (0,1]");
}

std::optional<double> LinkConfig::max_distance(const Page& page) const {
  if (!max_link_distance_ratio) return std::nullopt;
  return *max_link_distance_ratio * page.diagonal();
}

LinkResult link(std::span<const Entity> entities, const Page& page, const LinkConfig& config) {
  config.validate();
  std::vector<Entity> candidates;
  std::map<int, const Entity*> by_id;
  for (const Entity& e : entities) {
    if (e.label != GenericLabel::key && e.label != GenericLabel::value) continue;
    if (!by_id.emplace(e.id, &e).second) throw std::invalid_argument("duplicate entity id " + std::to_string(e.id));
    candidates.push_back(e);
  }

  struct Slot {
    const Entity* entity;
    std::size_t rank;
    bool claimed = false;
  };
  std::vector<Slot> keys;
  std::vector<Slot> values;
  const std::vector<int> order = reading_order(candidates, config.line_overlap);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Entity* e = by_id.at(order[rank]);
    (e->label == GenericLabel::key ? keys : values).push_back({e, rank});
  }

  const std::optional<double> limit = config.max_distance(page);
  LinkResult result;
  for (const Slot& value : values) {
    Slot* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (Slot& key : keys) {
      if (key.rank >= value.rank) break;  // keys are in rank order
      if (key.claimed) continue;
      const double d = center_distance(key.entity->box, value.entity->box, config.vertical_weight);
      if (limit && d > *limit) continue;
      if (!best || d < best_distance) {
        best = &key;
        best_distance = d;
      }
    }
    if (best) {
      best->claimed = true;
      result.pairs.push_back({best->entity->id, value.entity->id});
    } else {
      result.dropped_values.push_back(value.entity->id);
    }
  }
  for (const Slot& key : keys)
    if (!key.claimed) result.unlinked_keys.push_back(key.entity->id);
  return result;
}

}  // namespace docseed
