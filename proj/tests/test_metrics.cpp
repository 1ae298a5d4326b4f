#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "docseed/metrics.hpp"

using namespace docseed;
using nlohmann::json;

namespace {

const std::filesystem::path kData = DOCSEED_TEST_DATA;

json load_cases() {
  std::ifstream in(kData / "prf_cases.json");
  return json::parse(in);
}

std::vector<Entity> entities_of(const json& list) {
  std::vector<Entity> out;
  int id = 0;
  for (const auto& e : list) {
    Entity x;
    x.id = id++;
    x.label = *parse_generic_label(e[0].get<std::string>());
    x.token_indices = e[1].get<std::vector<int>>();
    x.text = "t";
    x.box = {0, 0, 1, 1};
    out.push_back(x);
  }
  return out;
}

std::vector<Link> links_of(const json& list) {
  std::vector<Link> out;
  for (const auto& l : list) out.push_back({l[0].get<int>(), l[1].get<int>()});
  return out;
}

double frac(const json& f) { return f[0].get<double>() / f[1].get<double>(); }

void check_case(const PRF& p, const json& c) {
  CAPTURE(c.at("name").get<std::string>());
  CHECK(p.tp == c.at("tp").get<int>());
  CHECK(p.fp == c.at("fp").get<int>());
  CHECK(p.fn == c.at("fn").get<int>());
  CHECK(std::abs(p.precision - frac(c.at("precision"))) <= 1e-9);
  CHECK(std::abs(p.recall - frac(c.at("recall"))) <= 1e-9);
  CHECK(std::abs(p.f1 - frac(c.at("f1"))) <= 1e-9);
}

std::vector<Entity> id_space(int n) {
  std::vector<Entity> out;
  for (int i = 0; i < n; ++i) out.push_back({i, i % 2 ? GenericLabel::value : GenericLabel::key, {i}, "t", {0, 0, 1, 1}});
  return out;
}

ReviewAction action(std::int64_t id, const std::string& doc, ActionKind kind, std::optional<std::string> ann,
                    json payload = json::object()) {
  ReviewAction a;
  a.action_id = id;
  a.doc_id = doc;
  a.kind = kind;
  a.annotation_id = std::move(ann);
  a.payload = std::move(payload);
  return a;
}

}  // namespace

TEST_CASE("entity PRF hand-computed cases") {
  const json cases = load_cases();
  REQUIRE(cases.at("entities").size() >= 5);
  for (const auto& c : cases.at("entities")) check_case(entity_prf(entities_of(c["predicted"]), entities_of(c["gold"])), c);
}

TEST_CASE("linking PRF hand-computed cases") {
  const json cases = load_cases();
  const auto space = id_space(8);
  for (const auto& c : cases.at("links")) check_case(linking_prf(links_of(c["predicted"]), links_of(c["gold"]), space), c);
}

TEST_CASE("linking PRF rejects ids outside the shared space") {
  const auto space = id_space(3);
  CHECK_THROWS_AS(linking_prf(std::vector<Link>{{0, 7}}, std::vector<Link>{}, space), std::invalid_argument);
  CHECK_THROWS_AS(linking_prf(std::vector<Link>{}, std::vector<Link>{{9, 1}}, space), std::invalid_argument);
}

TEST_CASE("PRF from counts") {
  const PRF empty = PRF::from_counts(0, 0, 0);
  CHECK(empty.f1 == 1.0);
  const PRF all_wrong = PRF::from_counts(0, 3, 0);
  CHECK(all_wrong.precision == 0.0);
  CHECK(all_wrong.f1 == 0.0);
  PRF sum = PRF::from_counts(1, 0, 1);
  sum += PRF::from_counts(1, 2, 0);
  CHECK(sum.tp == 2);
  CHECK(sum.fp == 2);
  CHECK(sum.fn == 1);
  CHECK(sum.precision == doctest::Approx(0.5));
  CHECK(sum.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("PRF symmetry and F1 bound on random pair sets") {
  std::mt19937_64 rng(81);
  const auto space = id_space(10);
  for (int i = 0; i < 500; ++i) {
    auto random_links = [&] {
      std::set<Link> s;
      const int n = std::uniform_int_distribution<int>(0, 6)(rng);
      for (int j = 0; j < n; ++j)
        s.insert({std::uniform_int_distribution<int>(0, 4)(rng) * 2, std::uniform_int_distribution<int>(0, 4)(rng) * 2 + 1});
      return std::vector<Link>(s.begin(), s.end());
    };
    const auto a = random_links(), b = random_links();
    const PRF ab = linking_prf(a, b, space), ba = linking_prf(b, a, space);
    CHECK(ab.precision == ba.recall);
    CHECK(ab.recall == ba.precision);
    CHECK(std::abs(ab.f1 - ba.f1) <= 1e-12);
    CHECK(ab.f1 <= 2 * std::min(ab.precision, ab.recall) + 1e-12);
    CHECK(ab.f1 >= 0.0);
    CHECK(ab.f1 <= 1.0);
  }
}

TEST_CASE("align_entity_ids maps matching token sets onto gold ids") {
  const std::vector<Entity> gold = {{4, GenericLabel::key, {0, 1}, "k", {0, 0, 1, 1}}, {7, GenericLabel::value, {2}, "v", {0, 0, 1, 1}}};
  const std::vector<Entity> pred = {{0, GenericLabel::key, {1, 0}, "k", {0, 0, 1, 1}}, {1, GenericLabel::value, {2, 3}, "v", {0, 0, 1, 1}}};
  const std::vector<Link> links = {{0, 1}};
  const AlignedEntities a = align_entity_ids(pred, links, gold);
  CHECK(a.id_map.at(0) == 4);
  CHECK(a.id_map.at(1) == 8);
  CHECK(a.links == std::vector<Link>{{4, 8}});
}

TEST_CASE("review effort: all accepted") {
  const std::vector<ReviewAction> log = {action(1, "a", ActionKind::accept, "a:0"), action(2, "a", ActionKind::accept, "a:1")};
  const EffortReport r = review_effort(log, {{"a", 2}});
  REQUIRE(r.total.automation_rate());
  CHECK(*r.total.automation_rate() == 1.0);
  CHECK(r.total.pending == 0);
}

TEST_CASE("review effort: three accepted and one edited") {
  const std::vector<ReviewAction> log = {action(1, "a", ActionKind::accept, "a:0"), action(2, "a", ActionKind::accept, "a:1"),
                                         action(3, "b", ActionKind::accept, "b:0"),
                                         action(4, "b", ActionKind::edit_text, "b:1", {{"old", "x"}, {"new", "y"}}),
                                         action(5, "b", ActionKind::edit_box, "b:1", {{"old", {0, 0, 1, 1}}, {"new", {0, 0, 2, 2}}})};
  const EffortReport r = review_effort(log, {{"a", 2}, {"b", 2}});
  CHECK(r.total.accepted == 3);
  CHECK(r.total.edited == 1);
  CHECK(*r.total.automation_rate() == 0.75);
  CHECK(r.to_json()["total"]["automation_rate"] == 0.75);
}

TEST_CASE("review effort: empty log is flagged no data") {
  const EffortReport r = review_effort({}, {});
  CHECK_FALSE(r.total.automation_rate().has_value());
  CHECK(r.to_json()["total"]["no_data"] == true);
  CHECK(r.to_table().find("no data") != std::string::npos);
  const EffortReport pending = review_effort({}, {{"a", 3}});
  CHECK(pending.total.pending == 3);
  CHECK_FALSE(pending.total.automation_rate().has_value());
}

TEST_CASE("review effort: rejections, additions and iterations") {
  const std::vector<ReviewAction> log = {
      action(1, "a", ActionKind::reject, "a:0"), action(2, "a", ActionKind::accept, "a:1"),
      action(3, "b", ActionKind::add, std::nullopt, {{"annotation", {{"id", "b:5"}, {"label", "x"}, {"text", "t"}, {"box", {0, 0, 1, 1}}}}}),
      action(4, "b", ActionKind::accept, "b:0")};
  const EffortReport r = review_effort(log, {{"a", 2}, {"b", 1}, {"c", 4}}, {{"a", 1}, {"b", 2}});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.total.rejected == 1);
  CHECK(r.total.added == 1);
  CHECK(r.total.accepted == 2);
  CHECK(r.total.pending == 4);
  CHECK(*r.total.automation_rate() == doctest::Approx(0.5));
}
