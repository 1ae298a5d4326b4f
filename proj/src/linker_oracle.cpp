// Reference implementation of the key-value linking procedure for testing.
// Deliberately shares no code with linker.cpp or the geometry helpers: line
// grouping, ordering and distance are all recomputed here from scratch.

#include <cmath>
#include <stdexcept>

#include "docseed/linker.hpp"

namespace docseed {

namespace {

struct Item {
  int id;
  bool is_key;
  int x1, y1, x2, y2;
};

bool same_line(const Item& a, const Item& b, double threshold) {
  const int ha = a.y2 - a.y1;
  const int hb = b.y2 - b.y1;
  double ratio;
  if (ha == 0 || hb == 0) {
    const Item& flat = ha == 0 ? a : b;
    const Item& other = ha == 0 ? b : a;
    ratio = (flat.y1 >= other.y1 && flat.y1 <= other.y2) ? 1.0 : 0.0;
  } else {
    const int lo = a.y1 > b.y1 ? a.y1 : b.y1;
    const int hi = a.y2 < b.y2 ? a.y2 : b.y2;
    const int smaller = ha < hb ? ha : hb;
    ratio = hi > lo ? static_cast<double>(hi - lo) / smaller : 0.0;
    if (ratio > 1.0) ratio = 1.0;
  }
  return ratio >= threshold;
}

double distance(const Item& a, const Item& b, double w) {
  const double dx = (a.x1 + a.x2) / 2.0 - (b.x1 + b.x2) / 2.0;
  const double dy = w * ((a.y1 + a.y2) / 2.0 - (b.y1 + b.y2) / 2.0);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

LinkResult link_oracle(std::span<const Entity> entities, const Page& page, const LinkConfig& config) {
  if (!(config.vertical_weight > 0.0)) throw std::invalid_argument("vertical_weight must be positive");

  std::vector<Item> items;
  for (const Entity& e : entities)
    if (e.label == GenericLabel::key || e.label == GenericLabel::value)
      items.push_back({e.id, e.label == GenericLabel::key, e.box.x1, e.box.y1, e.box.x2, e.box.y2});
  const std::size_t n = items.size();

  // Line membership as a reachability matrix, closed transitively.
  std::vector<std::vector<bool>> together(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) together[i][j] = i == j || same_line(items[i], items[j], config.line_overlap);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (together[i][k] && together[k][j]) together[i][j] = true;

  // Sort key per item: (line top, smallest id on the line, x1, id).
  struct Key {
    int line_top, line_id, x1, id;
  };
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    Key k{items[i].y1, items[i].id, items[i].x1, items[i].id};
    for (std::size_t j = 0; j < n; ++j) {
      if (!together[i][j]) continue;
      if (items[j].y1 < k.line_top) k.line_top = items[j].y1;
      if (items[j].id < k.line_id) k.line_id = items[j].id;
    }
    keys[i] = k;
  }
  auto before = [&](std::size_t a, std::size_t b) {
    const Key& p = keys[a];
    const Key& q = keys[b];
    if (p.line_top != q.line_top) return p.line_top < q.line_top;
    if (p.line_id != q.line_id) return p.line_id < q.line_id;
    if (p.x1 != q.x1) return p.x1 < q.x1;
    return p.id < q.id;
  };
  // Selection sort into position order.
  std::vector<std::size_t> position;
  std::vector<bool> placed(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!placed[i] && (pick == n || before(i, pick))) pick = i;
    placed[pick] = true;
    position.push_back(pick);
  }
  std::vector<std::size_t> rank_of(n);
  for (std::size_t r = 0; r < n; ++r) rank_of[position[r]] = r;

  const double diagonal = std::sqrt(static_cast<double>(page.width) * page.width +
                                    static_cast<double>(page.height) * page.height);
  const bool bounded = config.max_link_distance_ratio.has_value();
  const double limit = bounded ? *config.max_link_distance_ratio * diagonal : 0.0;

  LinkResult result;
  std::vector<bool> linked(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t v = position[r];
    if (items[v].is_key) continue;
    std::size_t chosen = n;
    double chosen_distance = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!items[k].is_key) continue;
      if (!(rank_of[k] < rank_of[v])) continue;  // key must come first
      if (linked[k]) continue;                    // key must be free
      const double d = distance(items[k], items[v], config.vertical_weight);
      if (bounded && d > limit) continue;
      const bool closer = chosen == n || d < chosen_distance ||
                          (d == chosen_distance && rank_of[k] < rank_of[chosen]);
      if (closer) {
        chosen = k;
        chosen_distance = d;
      }
    }
    if (chosen == n) {
      result.dropped_values.push_back(items[v].id);
    } else {
      linked[chosen] = true;
      result.pairs.push_back({items[chosen].id, items[v].id});
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = position[r];
    if (items[k].is_key && !linked[k]) result.unlinked_keys.push_back(items[k].id);
  }
  return result;
}

}  // namespace docseed
