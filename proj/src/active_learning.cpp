#include "docseed/active_learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "docseed/error.hpp"
#include "docseed/ingest.hpp"
#include "docseed/json_io.hpp"
#include "docseed/metrics.hpp"
#include "docseed/pipeline.hpp"
#include "docseed/store.hpp"

namespace docseed {

std::string_view to_string(UncertaintyStrategy s) noexcept {
  return s == UncertaintyStrategy::mean_entropy ? "mean_entropy" : "min_margin";
}

std::optional<UncertaintyStrategy> parse_uncertainty_strategy(std::string_view name) noexcept {
  if (name == "mean_entropy") return UncertaintyStrategy::mean_entropy;
  if (name == "min_margin") return UncertaintyStrategy::min_margin;
  return std::nullopt;
}

double token_entropy(const LabelDistribution& p) {
  if (!is_distribution(p)) throw std::invalid_argument("confidence is not a probability distribution");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return std::max(0.0, h);
}

double doc_uncertainty(std::span<const TokenPrediction> predictions, UncertaintyStrategy strategy) {
  if (predictions.empty()) throw std::invalid_argument("doc_uncertainty needs at least one prediction");
  if (strategy == UncertaintyStrategy::mean_entropy) {
    double sum = 0.0;
    for (const TokenPrediction& p : predictions) sum += token_entropy(p.confidence);
    return sum / static_cast<double>(predictions.size());
  }
  double min_margin = 1.0;
  for (const TokenPrediction& p : predictions) {
    if (!is_distribution(p.confidence)) throw std::invalid_argument("confidence is not a probability distribution");
    LabelDistribution sorted = p.confidence;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    min_margin = std::min(min_margin, sorted[0] - sorted[1]);
  }
  return 1.0 - min_margin;
}

std::vector<std::string> select_batch(const std::map<std::string, double>& scores, std::size_t k,
                                      const std::set<std::string>& exclude) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<std::pair<std::string, double>> pool;
  for (const auto& [doc, score] : scores)
    if (!exclude.count(doc)) pool.emplace_back(doc, score);
  // Map iteration is already ascending by id; stable sort keeps that on ties.
  std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pool.size() && i < k; ++i) out.push_back(pool[i].first);
  return out;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct DocExport {
  GoldEntitySet form;
  ReviewCounts counts;
  int skipped = 0;
};

// Accepted and edited records become a value entity carrying the record's
// label, linked to its source key when the key tokens are still free.
DocExport build_doc_export(const Document& doc, const std::optional<BootstrapRecord>& boot,
                           const AnnotationSet& annotations) {
  std::map<int, const Entity*> entities;
  if (boot)
    for (const Entity& e : boot->entities) entities[e.id] = &e;
  std::vector<bool> claimed(doc.tokens.size(), false);
  auto take_free = [&](const std::vector<int>& indices) {
    std::vector<int> out;
    for (int idx : indices)
      if (!claimed.at(static_cast<std::size_t>(idx))) out.push_back(idx);
    return out;
  };

  DocExport ex;
  int next_id = 0;
  for (const AnnotationRecord& r : annotations.records) {
    switch (r.status) {
      case AnnotationStatus::rejected: ++ex.counts.rejected; continue;
      case AnnotationStatus::accepted: ++ex.counts.accepted; break;
      case AnnotationStatus::edited: ++ex.counts.edited; break;
      case AnnotationStatus::automatic: continue;
    }

    std::vector<int> value_tokens;
    const Entity* source_value = nullptr;
    if (r.source_value_entity)
      if (auto it = entities.find(*r.source_value_entity); it != entities.end()) source_value = it->second;
    if (source_value && source_value->box == r.value_box) {
      value_tokens = take_free(source_value->token_indices);
    } else {
      std::vector<int> inside;
      for (const Token& t : doc.tokens) {
        const double cx = t.box.center_x(), cy = t.box.center_y();
        if (cx >= r.value_box.x1 && cx <= r.value_box.x2 && cy >= r.value_box.y1 && cy <= r.value_box.y2)
          inside.push_back(t.index);
      }
      value_tokens = take_free(inside);
    }
    if (value_tokens.empty()) {
      ++ex.skipped;
      continue;
    }
    for (int idx : value_tokens) claimed[static_cast<std::size_t>(idx)] = true;
    Entity value = make_entity(next_id++, GenericLabel::value, value_tokens, doc);
    ex.form.specific_labels[value.id] = r.label_id;
    if (r.value_text != value.text) ex.form.text_overrides[value.id] = r.value_text;

    if (r.source_key_entity)
      if (auto it = entities.find(*r.source_key_entity); it != entities.end()) {
        const std::vector<int>& key_tokens = it->second->token_indices;
        if (take_free(key_tokens).size() == key_tokens.size()) {
          for (int idx : key_tokens) claimed[static_cast<std::size_t>(idx)] = true;
          Entity key = make_entity(next_id++, GenericLabel::key, key_tokens, doc);
          ex.form.links.push_back({key.id, value.id});
          ex.form.entities.push_back(std::move(key));
        }
      }
    ex.form.entities.push_back(std::move(value));
  }
  std::sort(ex.form.links.begin(), ex.form.links.end());
  ex.form = with_fill_entities(doc, std::move(ex.form));
  return ex;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

IterationManifest export_iteration(ProjectStore& store) {
  IterationManifest manifest;
  store.with_exclusive_lock([&] {
    std::set<std::string> exported;
    int last = 0;
    std::map<std::string, int> doc_iteration;
    for (const IterationManifest& m : store.iterations()) {
      last = std::max(last, m.iteration);
      for (const auto& d : m.doc_ids) {
        exported.insert(d);
        doc_iteration[d] = m.iteration;
      }
    }
    std::vector<std::string> ready;
    for (const std::string& id : store.doc_ids())
      if (!exported.count(id) && store.annotations(id).complete()) ready.push_back(id);
    if (ready.empty()) throw Error("empty iteration");

    manifest.iteration = last + 1;
    const std::filesystem::path dir = store.iteration_dir(manifest.iteration);
    const std::filesystem::path forms = dir / "funsd";
    std::filesystem::create_directories(forms);
    std::map<std::string, int> baseline_counts;
    for (const std::string& id : ready) {
      const Document doc = store.document(id);
      const DocExport ex = build_doc_export(doc, store.bootstrap_record(id), store.annotations(id));
      write_text(forms / (id + ".json"), export_funsd(doc, ex.form));
      manifest.counts.accepted += ex.counts.accepted;
      manifest.counts.edited += ex.counts.edited;
      manifest.counts.rejected += ex.counts.rejected;
      manifest.skipped_annotations += ex.skipped;
      manifest.doc_ids.push_back(id);
      doc_iteration[id] = manifest.iteration;
      baseline_counts[id] = static_cast<int>(store.baseline(id).value_or(AnnotationSet{}).records.size());
    }
    manifest.export_path = std::filesystem::relative(forms, store.root()).generic_string();
    manifest.created_at = utc_now();

    std::vector<ReviewAction> log;
    for (const ReviewAction& a : store.audit_log())
      if (std::find(ready.begin(), ready.end(), a.doc_id) != ready.end()) log.push_back(a);
    const EffortReport effort = review_effort(log, baseline_counts, doc_iteration);
    nlohmann::json metrics = {{"iteration", manifest.iteration}, {"review_effort", effort.to_json()}};
    std::string table = effort.to_table();
    try {
      const ScoreReport score = score_documents(store, ready);
      metrics["entities"] = to_json(score.entities);
      metrics["linking"] = to_json(score.linking);
      metrics["linking_on_gold"] = to_json(score.linking_on_gold);
      table += "\n" + score.to_table();
    } catch (const Error&) {
      // No gold for these documents; effort only.
    }
    write_text(dir / "metrics.json", metrics.dump(2));
    write_text(dir / "metrics.txt", table);
    store.record_iteration(manifest);
  });
  return manifest;
}

std::vector<QueueItem> review_queue(const ProjectStore& store, UncertaintyStrategy strategy, std::size_t k) {
  std::set<std::string> exported;
  for (const IterationManifest& m : store.iterations()) exported.insert(m.doc_ids.begin(), m.doc_ids.end());
  std::map<std::string, double> scores;
  for (const std::string& id : store.doc_ids()) {
    if (exported.count(id)) continue;
    const auto record = store.bootstrap_record(id);
    if (!record || record->predictions.empty() || store.annotations(id).complete()) continue;
    scores[id] = doc_uncertainty(record->predictions, strategy);
  }
  std::vector<QueueItem> out;
  for (const std::string& id : select_batch(scores, k)) out.push_back({id, scores[id]});
  return out;
}

}  // namespace docseed
