#pragma once

// Token classification into generic labels, and grouping of labeled tokens
// into entities.

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "docseed/doc_model.hpp"
#include "docseed/ingest.hpp"

namespace docseed {

enum class BoundaryTag : std::uint8_t { B, I };

// Indexed by static_cast<size_t>(GenericLabel).
using LabelDistribution = std::array<double, 4>;

inline constexpr double kDistributionTolerance = 1e-6;

bool is_distribution(const LabelDistribution& p, double tolerance = kDistributionTolerance) noexcept;

// Largest probability; ties go to the earlier label in kGenericLabels.
GenericLabel argmax_label(const LabelDistribution& p) noexcept;

LabelDistribution one_hot(GenericLabel label) noexcept;

struct TokenPrediction {
  int token_index = 0;
  GenericLabel label = GenericLabel::other;
  BoundaryTag tag = BoundaryTag::B;
  LabelDistribution confidence{};

  double confidence_of(GenericLabel l) const noexcept {
    return confidence[static_cast<std::size_t>(l)];
  }

  friend bool operator==(const TokenPrediction&, const TokenPrediction&) = default;
};

struct GoldReplay {
  GoldEntitySet gold;
};
struct RuleBased {};
struct Remote {
  std::string endpoint;  // e.g. "http://127.0.0.1:9000"
  std::chrono::milliseconds timeout{30000};
};

using ClassifierKind = std::variant<GoldReplay, RuleBased, Remote>;

std::vector<TokenPrediction> classify(const Document& document, const ClassifierKind& kind);

std::vector<TokenPrediction> classify_gold_replay(const Document& document, const GoldEntitySet& gold);
std::vector<TokenPrediction> classify_rule_based(const Document& document);
std::vector<TokenPrediction> classify_remote(const Document& document, const Remote& remote);

// Wire protocol for POST /v1/classify.
std::string encode_classify_request(const Document& document);
// Validates coverage, label/tag vocabulary, sum-to-one and argmax consistency.
// Throws ProtocolError.
std::vector<TokenPrediction> decode_classify_response(const Document& document, std::string_view body);

double median_token_height(const Document& document);

// Tokens are walked in index order. A new entity starts on a B tag, a label
// change, or when the token neither continues the previous token's line within
// 2x the median token height nor wraps onto the next line within that gap.
// Tokens labeled other join no entity. Entity ids are assigned 0..n-1.
std::vector<Entity> aggregate_entities(const Document& document,
                                       std::span<const TokenPrediction> predictions);

}  // namespace docseed
