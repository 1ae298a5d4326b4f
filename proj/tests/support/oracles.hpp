#pragma once

// Reference computations written straight from the definitions, without the
// library's geometry helpers, used to check library output.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "docseed/doc_model.hpp"
#include "docseed/linker.hpp"

namespace testing {

using docseed::BBox;
using docseed::Entity;
using docseed::GenericLabel;

inline double naive_distance(const BBox& a, const BBox& b, double w) {
  const double dx = (a.x1 + a.x2) / 2.0 - (b.x1 + b.x2) / 2.0;
  const double dy = (a.y1 + a.y2) / 2.0 - (b.y1 + b.y2) / 2.0;
  return std::sqrt(dx * dx + (w * dy) * (w * dy));
}

inline bool naive_same_line(const BBox& a, const BBox& b, double threshold) {
  const int ha = a.y2 - a.y1, hb = b.y2 - b.y1;
  const int lo = std::max(a.y1, b.y1), hi = std::min(a.y2, b.y2);
  double ratio;
  if (ha == 0 || hb == 0) {
    const BBox& flat = ha == 0 ? a : b;
    const BBox& other = ha == 0 ? b : a;
    ratio = (flat.y1 >= other.y1 && flat.y1 <= other.y2) ? 1.0 : 0.0;
  } else {
    ratio = hi > lo ? double(hi - lo) / std::min(ha, hb) : 0.0;
  }
  return ratio >= threshold;
}

// Line-major order by flood fill; returns entity ids.
inline std::vector<int> naive_reading_order(const std::vector<Entity>& es, double threshold = 0.5) {
  const std::size_t n = es.size();
  std::vector<int> line(n, -1);
  int lines = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (line[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    line[s] = lines;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (line[v] < 0 && naive_same_line(es[u].box, es[v].box, threshold)) {
          line[v] = lines;
          stack.push_back(v);
        }
    }
    ++lines;
  }
  struct LineKey {
    int top = 1 << 30;
    int min_id = 1 << 30;
  };
  std::vector<LineKey> keys(static_cast<std::size_t>(lines));
  for (std::size_t i = 0; i < n; ++i) {
    auto& k = keys[static_cast<std::size_t>(line[i])];
    k.top = std::min(k.top, es[i].box.y1);
    k.min_id = std::min(k.min_id, es[i].id);
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& ka = keys[static_cast<std::size_t>(line[a])];
    const auto& kb = keys[static_cast<std::size_t>(line[b])];
    if (line[a] != line[b]) {
      if (ka.top != kb.top) return ka.top < kb.top;
      return ka.min_id < kb.min_id;
    }
    if (es[a].box.x1 != es[b].box.x1) return es[a].box.x1 < es[b].box.x1;
    return es[a].id < es[b].id;
  });
  std::vector<int> out;
  for (std::size_t i : idx) out.push_back(es[i].id);
  return out;
}

// Checks a LinkResult against H1 (precedence), H2 (injectivity), H3 (greedy
// nearest, replayed value by value), the distance bound and the partition
// of values into pairs/dropped. Returns an empty string when all hold.
inline std::string check_link_invariants(const std::vector<Entity>& entities, const docseed::Page& page,
                                         const docseed::LinkConfig& config, const docseed::LinkResult& r) {
  std::vector<Entity> kv;
  std::map<int, const Entity*> by_id;
  for (const Entity& e : entities)
    if (e.label == GenericLabel::key || e.label == GenericLabel::value) kv.push_back(e);
  for (const Entity& e : kv) by_id[e.id] = &e;
  const std::vector<int> order = naive_reading_order(kv, config.line_overlap);
  std::map<int, int> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  std::optional<double> bound;
  if (config.max_link_distance_ratio)
    bound = *config.max_link_distance_ratio * std::sqrt(double(page.width) * page.width + double(page.height) * page.height);

  std::set<int> keys_seen, values_seen;
  std::map<int, int> key_of_value;
  for (const auto& l : r.pairs) {
    if (!by_id.count(l.key_id) || by_id[l.key_id]->label != GenericLabel::key) return "pair key is not a key entity";
    if (!by_id.count(l.value_id) || by_id[l.value_id]->label != GenericLabel::value) return "pair value is not a value";
    if (!keys_seen.insert(l.key_id).second) return "key in two pairs";
    if (!values_seen.insert(l.value_id).second) return "value in two pairs";
    if (rank[l.key_id] >= rank[l.value_id]) return "key does not precede value";
    if (bound && naive_distance(by_id[l.key_id]->box, by_id[l.value_id]->box, config.vertical_weight) > *bound + 1e-9)
      return "pair exceeds distance bound";
    key_of_value[l.value_id] = l.key_id;
  }
  for (int v : r.dropped_values)
    if (!values_seen.insert(v).second) return "value both dropped and paired (or dropped twice)";
  std::set<int> unlinked(r.unlinked_keys.begin(), r.unlinked_keys.end());
  for (const Entity& e : kv) {
    if (e.label == GenericLabel::value && !values_seen.count(e.id)) return "value missing from result";
    if (e.label == GenericLabel::key && keys_seen.count(e.id) == unlinked.count(e.id)) return "key accounting broken";
  }
  if (unlinked.size() != r.unlinked_keys.size()) return "duplicate unlinked key";

  std::set<int> claimed;
  for (int v : order) {
    if (by_id[v]->label != GenericLabel::value) continue;
    std::vector<std::pair<double, int>> candidates;  // distance, rank
    for (int k : order) {
      if (by_id[k]->label != GenericLabel::key || rank[k] >= rank[v] || claimed.count(k)) continue;
      const double d = naive_distance(by_id[k]->box, by_id[v]->box, config.vertical_weight);
      if (bound && d > *bound) continue;
      candidates.emplace_back(d, rank[k]);
    }
    auto it = key_of_value.find(v);
    if (it == key_of_value.end()) {
      if (!candidates.empty()) return "value dropped although a candidate key existed";
      continue;
    }
    const int chosen = it->second;
    const double dc = naive_distance(by_id[chosen]->box, by_id[v]->box, config.vertical_weight);
    bool chosen_is_candidate = false;
    for (const auto& [d, rk] : candidates) {
      if (rk == rank[chosen]) chosen_is_candidate = true;
      if (d < dc - 1e-9) return "a strictly closer unclaimed key existed";
      if (std::abs(d - dc) <= 1e-9 && rk < rank[chosen]) return "distance tie not broken by reading order";
    }
    if (!chosen_is_candidate) return "chosen key was not an eligible candidate";
    claimed.insert(chosen);
  }
  return {};
}

}  // namespace testing
