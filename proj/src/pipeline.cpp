#include "docseed/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "docseed/annotation.hpp"
#include "docseed/error.hpp"
#include "docseed/store.hpp"

namespace docseed {

DocumentAnalysis analyze_document(const Document& document, const ClassifierKind& kind,
                                  const LinkConfig& link_config) {
  DocumentAnalysis out;
  out.predictions = classify(document, kind);
  out.entities = aggregate_entities(document, out.predictions);
  out.links = drop_unlabelable_pairs(out.entities, link(out.entities, document.page, link_config));
  return out;
}

namespace {

ClassifierKind kind_for(const ProjectStore& store, const ProjectConfig& config, const std::string& doc_id) {
  switch (config.classifier) {
    case ClassifierChoice::gold_replay: {
      auto gold = store.gold(doc_id);
      if (!gold) throw Error("gold_replay needs gold data, but " + doc_id + " has none");
      return GoldReplay{std::move(*gold)};
    }
    case ClassifierChoice::rule_based:
      return RuleBased{};
    case ClassifierChoice::remote:
      return Remote{config.endpoint};
  }
  return RuleBased{};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Entity> without_other(std::vector<Entity> entities) {
  std::erase_if(entities, [](const Entity& e) { return e.label == GenericLabel::other; });
  return entities;
}

}  // namespace

BootstrapSummary bootstrap_project(ProjectStore& store, const ProjectConfig& config, bool force, unsigned jobs) {
  config.validate();
  BootstrapSummary summary;
  std::vector<std::string> targets;
  for (const std::string& id : store.doc_ids()) {
    const bool annotated = store.bootstrap_record(id).has_value();
    if (annotated && (!force || !store.audit_log(id).empty())) {
      summary.skipped.push_back(id);
      continue;
    }
    targets.push_back(id);
  }

  std::vector<DocumentAnalysis> analyses(targets.size());
  std::vector<Document> docs(targets.size());
  parallel_for(targets.size(), jobs, [&](std::size_t i) {
    docs[i] = store.document(targets[i]);
    analyses[i] = analyze_document(docs[i], kind_for(store, config, targets[i]), config.link);
  });

  std::vector<LinkedDocument> linked;
  std::map<std::string, std::size_t> fresh;
  for (std::size_t i = 0; i < targets.size(); ++i) fresh[targets[i]] = i;
  for (const std::string& id : store.doc_ids()) {
    if (auto it = fresh.find(id); it != fresh.end()) {
      linked.push_back({id, analyses[it->second].entities, analyses[it->second].links});
    } else if (auto rec = store.bootstrap_record(id)) {
      linked.push_back({id, rec->entities, rec->links});
    }
  }
  store.set_schema(induce_schema(linked));
  const LabelSchema schema = store.schema();

  const std::string classifier_name(to_string(config.classifier));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const DocumentAnalysis& a = analyses[i];
    AnnotationSet baseline;
    baseline.records = generate_annotations(docs[i], a.entities, a.links, schema, a.predictions);
    summary.annotations += baseline.records.size();
    store.put_bootstrap(targets[i], BootstrapRecord{classifier_name, a.predictions, a.entities, a.links}, baseline);
    summary.processed.push_back(targets[i]);
  }
  return summary;
}

ScoreReport score_documents(const ProjectStore& store, const std::vector<std::string>& doc_ids) {
  ScoreReport report;
  for (const std::string& id : doc_ids) {
    const auto gold = store.gold(id);
    if (!gold) continue;
    const Document doc = store.document(id);
    const std::vector<Entity> gold_entities = without_other(gold->entities);

    std::vector<Entity> predicted;
    std::vector<Link> predicted_links;
    if (auto rec = store.bootstrap_record(id)) {
      predicted = rec->entities;
      predicted_links = rec->links.pairs;
    } else {
      const DocumentAnalysis a = analyze_document(doc, kind_for(store, store.config(), id), store.config().link);
      predicted = a.entities;
      predicted_links = a.links.pairs;
    }
    predicted = without_other(std::move(predicted));
    report.entities += entity_prf(predicted, gold_entities);

    // Predicted ids are mapped into the gold id space; unmatched entities get
    // fresh ids, so their links can only count as false positives.
    const AlignedEntities aligned = align_entity_ids(predicted, predicted_links, gold_entities);
    std::vector<Entity> shared = gold_entities;
    for (const Entity& e : aligned.entities)
      if (std::none_of(shared.begin(), shared.end(), [&](const Entity& g) { return g.id == e.id; }))
        shared.push_back(e);
    report.linking += linking_prf(aligned.links, gold->links, shared);

    const LinkResult on_gold = link(gold_entities, doc.page, store.config().link);
    report.linking_on_gold += linking_prf(on_gold.pairs, gold->links, gold_entities);

    report.doc_ids.push_back(id);
    ++report.documents;
  }
  if (report.documents == 0) throw Error("no gold data to score against");
  return report;
}

ScoreReport score_project(const ProjectStore& store) { return score_documents(store, store.doc_ids()); }

std::string ScoreReport::to_table() const {
  std::string out = "metric            precision  recall  f1      tp    fp    fn\n";
  auto row = [&](const char* name, const PRF& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-16s  %9.4f  %6.4f  %6.4f  %4d  %4d  %4d\n", name, p.precision, p.recall, p.f1,
                  p.tp, p.fp, p.fn);
    out += buf;
  };
  row("entities", entities);
  row("linking", linking);
  row("linking_on_gold", linking_on_gold);
  out += "documents: " + std::to_string(documents) + "\n";
  return out;
}

nlohmann::json ScoreReport::to_json() const {
  return {{"documents", documents},
          {"doc_ids", doc_ids},
          {"entities", docseed::to_json(entities)},
          {"linking", docseed::to_json(linking)},
          {"linking_on_gold", docseed::to_json(linking_on_gold)}};
}

}  // namespace docseed
