#include "docseed/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace docseed {

PRF PRF::from_counts(int tp, int fp, int fn) {
  PRF r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : (fn == 0 ? 1.0 : 0.0);
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : (fp == 0 ? 1.0 : 0.0);
  const double sum = r.precision + r.recall;
  r.f1 = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
  return r;
}

PRF& PRF::operator+=(const PRF& other) {
  *this = from_counts(tp + other.tp, fp + other.fp, fn + other.fn);
  return *this;
}

PRF entity_prf(std::span<const Entity> predicted, std::span<const Entity> gold) {
  using Key = std::pair<GenericLabel, std::vector<int>>;
  auto key_of = [](const Entity& e) {
    std::vector<int> tokens = e.token_indices;
    std::sort(tokens.begin(), tokens.end());
    return Key{e.label, std::move(tokens)};
  };
  std::multiset<Key> unmatched;
  for (const Entity& g : gold) unmatched.insert(key_of(g));
  int tp = 0;
  for (const Entity& p : predicted) {
    auto it = unmatched.find(key_of(p));
    if (it != unmatched.end()) {
      ++tp;
      unmatched.erase(it);
    }
  }
  const int fp = static_cast<int>(predicted.size()) - tp;
  const int fn = static_cast<int>(gold.size()) - tp;
  return PRF::from_counts(tp, fp, fn);
}

PRF linking_prf(std::span<const Link> predicted, std::span<const Link> gold, std::span<const Entity> shared_entities) {
  std::set<int> ids;
  for (const Entity& e : shared_entities) ids.insert(e.id);
  auto check = [&](const Link& l) {
    if (!ids.count(l.key_id) || !ids.count(l.value_id))
      throw std::invalid_argument("pair (" + std::to_string(l.key_id) + "," + std::to_string(l.value_id) +
                                  ") is outside the shared entity id space");
  };
  std::set<Link> gold_set;
  for (const Link& l : gold) {
    check(l);
    gold_set.insert(l);
  }
  std::set<Link> pred_set;
  for (const Link& l : predicted) {
    check(l);
    pred_set.insert(l);
  }
  int tp = 0;
  for (const Link& l : pred_set) tp += static_cast<int>(gold_set.count(l));
  return PRF::from_counts(tp, static_cast<int>(pred_set.size()) - tp, static_cast<int>(gold_set.size()) - tp);
}

AlignedEntities align_entity_ids(std::span<const Entity> predicted, std::span<const Link> links,
                                 std::span<const Entity> gold) {
  std::map<std::vector<int>, int> gold_by_tokens;
  int next = 0;
  for (const Entity& g : gold) {
    std::vector<int> tokens = g.token_indices;
    std::sort(tokens.begin(), tokens.end());
    gold_by_tokens.emplace(std::move(tokens), g.id);
    next = std::max(next, g.id + 1);
  }
  AlignedEntities out;
  std::set<int> used;
  for (const Entity& p : predicted) {
    std::vector<int> tokens = p.token_indices;
    std::sort(tokens.begin(), tokens.end());
    int id;
    auto it = gold_by_tokens.find(tokens);
    if (it != gold_by_tokens.end() && !used.count(it->second)) {
      id = it->second;
    } else {
      id = next++;
    }
    used.insert(id);
    out.id_map[p.id] = id;
    Entity e = p;
    e.id = id;
    out.entities.push_back(std::move(e));
  }
  for (const Link& l : links) out.links.push_back({out.id_map.at(l.key_id), out.id_map.at(l.value_id)});
  return out;
}

std::optional<double> EffortRow::automation_rate() const {
  if (reviewed() == 0) return std::nullopt;
  return static_cast<double>(accepted) / reviewed();
}

EffortReport review_effort(std::span<const ReviewAction> log, const std::map<std::string, int>& baseline_counts,
                           const std::map<std::string, int>& doc_iteration) {
  struct Fate {
    bool added = false;
    AnnotationStatus status = AnnotationStatus::automatic;
  };
  std::map<std::string, std::map<std::string, Fate>> fates;  // doc -> annotation -> fate
  for (const ReviewAction& a : log) {
    if (a.kind == ActionKind::add) {
      std::string id = a.payload.contains("annotation") ? a.payload["annotation"].value("id", std::string()) : "";
      fates[a.doc_id][id] = {true, AnnotationStatus::edited};
      continue;
    }
    if (!a.annotation_id) continue;
    Fate& f = fates[a.doc_id][*a.annotation_id];
    switch (a.kind) {
      case ActionKind::accept: f.status = AnnotationStatus::accepted; break;
      case ActionKind::reject: f.status = AnnotationStatus::rejected; break;
      default: f.status = AnnotationStatus::edited; break;
    }
  }

  std::set<std::string> docs;
  for (const auto& [d, _] : baseline_counts) docs.insert(d);
  for (const auto& [d, _] : fates) docs.insert(d);

  std::map<std::optional<int>, EffortRow> rows;
  for (const std::string& d : docs) {
    std::optional<int> iteration;
    if (auto it = doc_iteration.find(d); it != doc_iteration.end()) iteration = it->second;
    EffortRow& row = rows[iteration];
    row.iteration = iteration;
    const int baseline = baseline_counts.count(d) ? baseline_counts.at(d) : 0;
    row.baseline += baseline;
    int touched = 0;
    if (auto it = fates.find(d); it != fates.end()) {
      for (const auto& [_, f] : it->second) {
        if (f.added) {
          ++row.added;
          continue;
        }
        ++touched;
        if (f.status == AnnotationStatus::accepted) ++row.accepted;
        if (f.status == AnnotationStatus::edited) ++row.edited;
        if (f.status == AnnotationStatus::rejected) ++row.rejected;
      }
    }
    row.pending += std::max(0, baseline - touched);
  }

  EffortReport report;
  for (auto& [_, row] : rows) {
    report.total.baseline += row.baseline;
    report.total.accepted += row.accepted;
    report.total.edited += row.edited;
    report.total.rejected += row.rejected;
    report.total.added += row.added;
    report.total.pending += row.pending;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string fraction(int part, int whole) {
  if (whole == 0) return "no data";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(part) / whole);
  return buf;
}

nlohmann::json row_json(const EffortRow& r) {
  const int n = r.reviewed();
  auto frac = [&](int part) { return n ? nlohmann::json(static_cast<double>(part) / n) : nlohmann::json(nullptr); };
  return {{"iteration", r.iteration ? nlohmann::json(*r.iteration) : nlohmann::json(nullptr)},
          {"baseline", r.baseline},
          {"accepted", r.accepted},
          {"edited", r.edited},
          {"rejected", r.rejected},
          {"added", r.added},
          {"pending", r.pending},
          {"reviewed", n},
          {"fractions", {{"accepted", frac(r.accepted)}, {"edited", frac(r.edited)}, {"rejected", frac(r.rejected)}, {"added", frac(r.added)}}},
          {"automation_rate", frac(r.accepted)},
          {"no_data", n == 0}};
}

}  // namespace

std::string EffortReport::to_table() const {
  std::string out = "iteration  baseline  accepted  edited  rejected  added  pending  automation\n";
  auto line = [&](const std::string& name, const EffortRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-9s  %8d  %8d  %6d  %8d  %5d  %7d  %s\n", name.c_str(), r.baseline, r.accepted,
                  r.edited, r.rejected, r.added, r.pending, fraction(r.accepted, r.reviewed()).c_str());
    out += buf;
  };
  for (const EffortRow& r : rows) line(r.iteration ? std::to_string(*r.iteration) : "open", r);
  line("total", total);
  return out;
}

nlohmann::json EffortReport::to_json() const {
  nlohmann::json j = {{"rows", nlohmann::json::array()}, {"total", row_json(total)}};
  for (const EffortRow& r : rows) j["rows"].push_back(row_json(r));
  return j;
}

nlohmann::json to_json(const PRF& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1},
          {"tp", prf.tp},               {"fp", prf.fp},         {"fn", prf.fn}};
}

}  // namespace docseed
