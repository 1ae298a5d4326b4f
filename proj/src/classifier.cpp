#include "docseed/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "docseed/error.hpp"

namespace docseed {

using nlohmann::json;

bool is_distribution(const LabelDistribution& p, double tolerance) noexcept {
  double sum = 0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tolerance) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

GenericLabel argmax_label(const LabelDistribution& p) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return kGenericLabels[best];
}

LabelDistribution one_hot(GenericLabel label) noexcept {
  LabelDistribution p{};
  p[static_cast<std::size_t>(label)] = 1.0;
  return p;
}

std::vector<TokenPrediction> classify(const Document& document, const ClassifierKind& kind) {
  return std::visit(
      [&](const auto& k) -> std::vector<TokenPrediction> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GoldReplay>) {
          return classify_gold_replay(document, k.gold);
        } else if constexpr (std::is_same_v<K, RuleBased>) {
          return classify_rule_based(document);
        } else {
          return classify_remote(document, k);
        }
      },
      kind);
}

std::vector<TokenPrediction> classify_gold_replay(const Document& document, const GoldEntitySet& gold) {
  std::vector<TokenPrediction> out(document.tokens.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {static_cast<int>(i), GenericLabel::other, BoundaryTag::B, one_hot(GenericLabel::other)};
  std::vector<bool> seen(out.size(), false);
  for (const Entity& e : gold.entities) {
    bool first = true;
    for (int idx : e.token_indices) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= out.size())
        throw std::invalid_argument("gold entity " + std::to_string(e.id) + " references a missing token");
      if (seen[static_cast<std::size_t>(idx)])
        throw std::invalid_argument("gold entities overlap at token " + std::to_string(idx));
      seen[static_cast<std::size_t>(idx)] = true;
      out[static_cast<std::size_t>(idx)] = {idx, e.label, first ? BoundaryTag::B : BoundaryTag::I,
                                            one_hot(e.label)};
      first = false;
    }
  }
  return out;
}

namespace {

constexpr double kRuleConfidence = 0.85;

LabelDistribution rule_distribution(GenericLabel label) {
  LabelDistribution p;
  p.fill((1.0 - kRuleConfidence) / 3.0);
  p[static_cast<std::size_t>(label)] = kRuleConfidence;
  return p;
}

bool ends_with_colon(const std::string& s) { return !s.empty() && s.back() == ':'; }

}  // namespace

std::vector<TokenPrediction> classify_rule_based(const Document& document) {
  const std::size_t n = document.tokens.size();
  std::vector<BBox> boxes;
  std::vector<int> ids;
  boxes.reserve(n);
  ids.reserve(n);
  for (const Token& t : document.tokens) {
    boxes.push_back(t.box);
    ids.push_back(t.index);
  }
  std::vector<TokenPrediction> out(n);
  for (const auto& line : group_lines(boxes, ids)) {
    auto first_colon = std::find_if(line.begin(), line.end(), [&](std::size_t m) {
      return ends_with_colon(document.tokens[m].text);
    });
    std::vector<GenericLabel> labels(line.size(), GenericLabel::other);
    if (first_colon != line.end()) {
      const auto lead = static_cast<std::size_t>(first_colon - line.begin());
      for (std::size_t p = 0; p < line.size(); ++p) {
        if (p <= lead || ends_with_colon(document.tokens[line[p]].text)) {
          labels[p] = GenericLabel::key;
        } else {
          labels[p] = GenericLabel::value;
        }
      }
    }
    for (std::size_t p = 0; p < line.size(); ++p) {
      const std::size_t m = line[p];
      const bool starts = p == 0 || labels[p] != labels[p - 1] ||
                          (labels[p] == GenericLabel::key && ends_with_colon(document.tokens[line[p - 1]].text));
      out[m] = {static_cast<int>(m), labels[p], starts ? BoundaryTag::B : BoundaryTag::I,
                rule_distribution(labels[p])};
    }
  }
  return out;
}

std::string encode_classify_request(const Document& document) {
  using ordered = nlohmann::ordered_json;
  ordered tokens = ordered::array();
  for (const Token& t : document.tokens)
    tokens.push_back({{"i", t.index}, {"text", t.text}, {"box", {t.box.x1, t.box.y1, t.box.x2, t.box.y2}}});
  ordered body = {{"doc_id", document.doc_id},
                  {"page", {{"width", document.page.width}, {"height", document.page.height}}},
                  {"tokens", std::move(tokens)}};
  return body.dump(-1, ' ', false, ordered::error_handler_t::replace);
}

std::vector<TokenPrediction> decode_classify_response(const Document& document, std::string_view body) {
  json root;
  try {
    root = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  if (!root.is_object()) throw ProtocolError("response must be an object");
  if (!root.contains("doc_id") || root["doc_id"] != document.doc_id)
    throw ProtocolError("response doc_id does not match request");
  if (!root.contains("predictions") || !root["predictions"].is_array())
    throw ProtocolError("response lacks a predictions array");
  const json& preds = root["predictions"];
  if (preds.size() != document.tokens.size())
    throw ProtocolError("expected " + std::to_string(document.tokens.size()) + " predictions, got " +
                        std::to_string(preds.size()));

  std::vector<TokenPrediction> out(document.tokens.size());
  std::vector<bool> seen(document.tokens.size(), false);
  for (const json& p : preds) {
    if (!p.is_object() || !p.contains("i") || !p["i"].is_number_integer())
      throw ProtocolError("prediction lacks an integer \"i\"");
    const auto i = p["i"].get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= out.size()) throw ProtocolError("prediction index out of range");
    const auto idx = static_cast<std::size_t>(i);
    if (seen[idx]) throw ProtocolError("token " + std::to_string(i) + " predicted twice");
    seen[idx] = true;

    if (!p.contains("label") || !p["label"].is_string()) throw ProtocolError("prediction lacks a label");
    const auto label = parse_generic_label(p["label"].get<std::string>());
    if (!label) throw ProtocolError("unknown label " + p["label"].dump());
    if (!p.contains("tag") || (p["tag"] != "B" && p["tag"] != "I")) throw ProtocolError("tag must be B or I");
    if (!p.contains("confidence") || !p["confidence"].is_object())
      throw ProtocolError("prediction lacks a confidence map");
    const json& conf = p["confidence"];
    if (conf.size() != 4) throw ProtocolError("confidence must have exactly key, value, header, other");
    LabelDistribution dist{};
    for (GenericLabel g : kGenericLabels) {
      auto it = conf.find(std::string(to_string(g)));
      if (it == conf.end() || !it->is_number())
        throw ProtocolError("confidence lacks a number for " + std::string(to_string(g)));
      dist[static_cast<std::size_t>(g)] = it->get<double>();
    }
    if (!is_distribution(dist)) throw ProtocolError("confidence for token " + std::to_string(i) + " does not sum to 1");
    const double top = *std::max_element(dist.begin(), dist.end());
    if (top - dist[static_cast<std::size_t>(*label)] > 1e-9)
      throw ProtocolError("label of token " + std::to_string(i) + " is not the argmax of its confidence");
    out[idx] = {static_cast<int>(idx), argmax_label(dist), p["tag"] == "B" ? BoundaryTag::B : BoundaryTag::I,
                dist};
  }
  return out;
}

std::vector<TokenPrediction> classify_remote(const Document& document, const Remote& remote) {
  if (document.tokens.empty()) throw std::invalid_argument("remote classification needs at least one token");
  httplib::Client client(remote.endpoint);
  if (!client.is_valid()) throw GatewayError(remote.endpoint, "invalid endpoint address");
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(remote.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(remote.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post("/v1/classify", encode_classify_request(document), "application/json");
  if (!res) throw GatewayError(remote.endpoint, httplib::to_string(res.error()));
  if (res->status != 200)
    throw GatewayError(remote.endpoint, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  return decode_classify_response(document, res->body);
}

double median_token_height(const Document& document) {
  if (document.tokens.empty()) return 0.0;
  std::vector<int> heights;
  heights.reserve(document.tokens.size());
  for (const Token& t : document.tokens) heights.push_back(t.box.height());
  std::sort(heights.begin(), heights.end());
  const std::size_t mid = heights.size() / 2;
  if (heights.size() % 2 == 1) return heights[mid];
  return (heights[mid - 1] + heights[mid]) / 2.0;
}

std::vector<Entity> aggregate_entities(const Document& document, std::span<const TokenPrediction> predictions) {
  if (predictions.size() != document.tokens.size())
    throw std::invalid_argument("aggregate_entities needs one prediction per token");
  std::vector<const TokenPrediction*> by_index(document.tokens.size(), nullptr);
  for (const TokenPrediction& p : predictions) {
    if (p.token_index < 0 || static_cast<std::size_t>(p.token_index) >= by_index.size() ||
        by_index[static_cast<std::size_t>(p.token_index)])
      throw std::invalid_argument("predictions must cover each token exactly once");
    by_index[static_cast<std::size_t>(p.token_index)] = &p;
  }

  const double max_gap = 2.0 * median_token_height(document);
  auto continues = [&](const BBox& prev, const BBox& cur) {
    if (vertical_overlap_ratio(prev, cur) >= kDefaultLineOverlap) return cur.x1 - prev.x2 <= max_gap;
    return cur.y1 >= prev.y1 && cur.y1 - prev.y2 <= max_gap;
  };

  std::vector<Entity> entities;
  std::vector<int> members;
  GenericLabel open_label = GenericLabel::other;
  auto close = [&] {
    if (!members.empty())
      entities.push_back(make_entity(static_cast<int>(entities.size()), open_label, std::move(members), document));
    members.clear();
  };
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    const TokenPrediction& p = *by_index[i];
    if (p.label == GenericLabel::other) {
      close();
      continue;
    }
    const bool extend = !members.empty() && p.tag == BoundaryTag::I && p.label == open_label &&
                        continues(document.tokens[static_cast<std::size_t>(members.back())].box,
                                  document.tokens[i].box);
    if (!extend) {
      close();
      open_label = p.label;
    }
    members.push_back(static_cast<int>(i));
  }
  close();
  return entities;
}

}  // namespace docseed
