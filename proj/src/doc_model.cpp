#include "docseed/doc_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "docseed/error.hpp"

namespace docseed {

BBox bbox_union(const BBox& a, const BBox& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

double center_distance(const BBox& a, const BBox& b, double vertical_weight) noexcept {
  const double dx = a.center_x() - b.center_x();
  const double dy = vertical_weight * (a.center_y() - b.center_y());
  return std::sqrt(dx * dx + dy * dy);
}

double vertical_overlap_ratio(const BBox& a, const BBox& b) noexcept {
  const int smaller = std::min(a.height(), b.height());
  if (smaller == 0) {
    const BBox& flat = a.height() == 0 ? a : b;
    const BBox& other = a.height() == 0 ? b : a;
    return (flat.y1 >= other.y1 && flat.y1 <= other.y2) ? 1.0 : 0.0;
  }
  const int overlap = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (overlap <= 0) return 0.0;
  return std::min(1.0, static_cast<double>(overlap) / smaller);
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

std::vector<std::vector<std::size_t>> group_lines(std::span<const BBox> boxes,
                                                  std::span<const int> tie_ids,
                                                  double threshold) {
  const std::size_t n = boxes.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (vertical_overlap_ratio(boxes[i], boxes[j]) >= threshold) sets.unite(i, j);

  std::vector<std::vector<std::size_t>> lines;
  std::vector<std::size_t> line_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (line_of_root[root] == n) {
      line_of_root[root] = lines.size();
      lines.emplace_back();
    }
    lines[line_of_root[root]].push_back(i);
  }

  auto member_less = [&](std::size_t a, std::size_t b) {
    if (boxes[a].x1 != boxes[b].x1) return boxes[a].x1 < boxes[b].x1;
    return tie_ids[a] < tie_ids[b];
  };
  struct LineKey {
    int top;
    int min_id;
  };
  std::vector<LineKey> keys;
  keys.reserve(lines.size());
  for (auto& line : lines) {
    std::sort(line.begin(), line.end(), member_less);
    LineKey key{boxes[line.front()].y1, tie_ids[line.front()]};
    for (std::size_t m : line) {
      key.top = std::min(key.top, boxes[m].y1);
      key.min_id = std::min(key.min_id, tie_ids[m]);
    }
    keys.push_back(key);
  }
  std::vector<std::size_t> perm(lines.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].top != keys[b].top) return keys[a].top < keys[b].top;
    return keys[a].min_id < keys[b].min_id;
  });
  std::vector<std::vector<std::size_t>> ordered;
  ordered.reserve(lines.size());
  for (std::size_t p : perm) ordered.push_back(std::move(lines[p]));
  return ordered;
}

std::string_view to_string(GenericLabel label) noexcept {
  switch (label) {
    case GenericLabel::key: return "key";
    case GenericLabel::value: return "value";
    case GenericLabel::header: return "header";
    case GenericLabel::other: return "other";
  }
  return "other";
}

std::optional<GenericLabel> parse_generic_label(std::string_view name) noexcept {
  for (GenericLabel label : kGenericLabels)
    if (to_string(label) == name) return label;
  return std::nullopt;
}

double Page::diagonal() const noexcept {
  return std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
}

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

void validate(const Document& doc) {
  if (doc.page.width <= 0 || doc.page.height <= 0)
    throw FormatError("document " + doc.doc_id + ": page size must be positive");
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.index != static_cast<int>(i))
      throw FormatError("document " + doc.doc_id + ": token indices must be 0..n-1 in order");
    if (trim(t.text).empty())
      throw FormatError("document " + doc.doc_id + ": token " + std::to_string(i) + " has blank text");
    if (!doc.page.contains(t.box))
      throw FormatError("document " + doc.doc_id + ": token " + std::to_string(i) +
                        " box lies outside the page");
    if (t.ocr_confidence && (*t.ocr_confidence < 0.0 || *t.ocr_confidence > 1.0))
      throw FormatError("document " + doc.doc_id + ": token " + std::to_string(i) +
                        " confidence outside [0,1]");
  }
}

Entity make_entity(int id, GenericLabel label, std::vector<int> token_indices, const Document& doc) {
  if (token_indices.empty()) throw std::invalid_argument("entity needs at least one token");
  Entity e{id, label, std::move(token_indices), {}, {}};
  bool first = true;
  for (int idx : e.token_indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= doc.tokens.size())
      throw std::invalid_argument("entity token index out of range");
    const Token& t = doc.tokens[static_cast<std::size_t>(idx)];
    if (first) {
      e.box = t.box;
      e.text = t.text;
      first = false;
    } else {
      e.box = bbox_union(e.box, t.box);
      e.text += ' ';
      e.text += t.text;
    }
  }
  return e;
}

std::vector<int> reading_order(std::span<const Entity> entities, double line_threshold) {
  std::vector<BBox> boxes;
  std::vector<int> ids;
  boxes.reserve(entities.size());
  ids.reserve(entities.size());
  for (const Entity& e : entities) {
    boxes.push_back(e.box);
    ids.push_back(e.id);
  }
  std::vector<int> order;
  order.reserve(entities.size());
  for (const auto& line : group_lines(boxes, ids, line_threshold))
    for (std::size_t m : line) order.push_back(ids[m]);
  return order;
}

}  // namespace docseed
