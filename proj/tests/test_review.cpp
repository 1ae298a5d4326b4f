#include <doctest.h>

#include <map>
#include <random>

#include "docseed/error.hpp"
#include "docseed/review.hpp"

using namespace docseed;
using nlohmann::json;

namespace {

AnnotationRecord rec(const std::string& id, const std::string& label, const std::string& text, BBox box) {
  AnnotationRecord r;
  r.annotation_id = id;
  r.label_id = label;
  r.value_text = text;
  r.value_box = box;
  r.source_key_entity = 0;
  r.source_value_entity = 1;
  r.confidence = 0.8;
  return r;
}

AnnotationSet baseline() {
  return {{rec("d:0", "fax_number", "(336) 335-7392", {300, 320, 500, 350}),
           rec("d:1", "date", "12/10/98", {620, 200, 760, 230}),
           rec("d:2", "to", "George Baroody", {300, 200, 520, 230})}};
}

ReviewAction act(std::int64_t id, ActionKind kind, std::optional<std::string> ann, json payload = json::object()) {
  ReviewAction a;
  a.action_id = id;
  a.doc_id = "d";
  a.annotation_id = std::move(ann);
  a.kind = kind;
  a.payload = std::move(payload);
  a.actor = "tester";
  a.timestamp = "2026-01-01T00:00:00.000Z";
  return a;
}

// Plain map model of the transition table, kept independent of apply_action.
struct Mirror {
  struct Row {
    std::string label, text, status = "auto";
    BBox box;
  };
  std::map<std::string, Row> rows;
  std::vector<std::string> order;

  explicit Mirror(const AnnotationSet& s) {
    for (const auto& r : s.records) {
      rows[r.annotation_id] = {r.label_id, r.value_text, "auto", r.value_box};
      order.push_back(r.annotation_id);
    }
  }
};

// Builds a valid action against the mirror and applies it there.
ReviewAction random_valid_action(std::mt19937_64& rng, Mirror& m, std::int64_t id, int& added) {
  std::vector<std::string> open, editable;
  for (const auto& aid : m.order) {
    const auto& s = m.rows[aid].status;
    if (s == "auto") open.push_back(aid);
    if (s == "auto" || s == "edited") editable.push_back(aid);
  }
  const std::vector<std::string> labels = {"date", "total", "phone_number", "fax_number", "invoice_no"};
  auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  for (;;) {
    const int k = std::uniform_int_distribution<int>(0, 6)(rng);
    if ((k == 0 || k == 1) && !open.empty()) {
      const std::string aid = pick(open);
      m.rows[aid].status = k == 0 ? "accepted" : "rejected";
      return act(id, k == 0 ? ActionKind::accept : ActionKind::reject, aid);
    }
    if ((k == 2 || k == 5) && !editable.empty()) {
      const std::string aid = pick(editable);
      auto& row = m.rows[aid];
      const std::string nl = pick(labels);
      json p = {{"old", row.label}, {"new", nl}};
      if (k == 5) p["new_key_entity"] = 4;
      row.label = nl;
      row.status = "edited";
      return act(id, k == 2 ? ActionKind::edit_label : ActionKind::relink, aid, p);
    }
    if (k == 3 && !editable.empty()) {
      const std::string aid = pick(editable);
      auto& row = m.rows[aid];
      const int x = std::uniform_int_distribution<int>(0, 400)(rng);
      const BBox nb{x, x, x + 30, x + 20};
      json p = {{"old", {row.box.x1, row.box.y1, row.box.x2, row.box.y2}}, {"new", {nb.x1, nb.y1, nb.x2, nb.y2}}};
      row.box = nb;
      row.status = "edited";
      return act(id, ActionKind::edit_box, aid, p);
    }
    if (k == 4 && !editable.empty()) {
      const std::string aid = pick(editable);
      auto& row = m.rows[aid];
      const std::string nt = "text " + std::to_string(id);
      json p = {{"old", row.text}, {"new", nt}};
      row.text = nt;
      row.status = "edited";
      return act(id, ActionKind::edit_text, aid, p);
    }
    if (k == 6) {
      const std::string aid = "d:new" + std::to_string(added++);
      const std::string label = pick(labels);
      m.rows[aid] = {label, "added", "edited", {5, 5, 50, 25}};
      m.order.push_back(aid);
      return act(id, ActionKind::add, std::nullopt,
                 {{"annotation", {{"id", aid}, {"label", label}, {"text", "added"}, {"box", {5, 5, 50, 25}}}}});
    }
  }
}

void check_against_mirror(const AnnotationSet& s, const Mirror& m) {
  REQUIRE(s.records.size() == m.order.size());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    CHECK(r.annotation_id == m.order[i]);
    const auto& row = m.rows.at(r.annotation_id);
    CHECK(r.label_id == row.label);
    CHECK(r.value_text == row.text);
    CHECK(r.value_box == row.box);
    CHECK(to_string(r.status) == row.status);
  }
}

}  // namespace

TEST_CASE("accept changes only the status") {
  const AnnotationSet s = apply_action(baseline(), act(1, ActionKind::accept, "d:0"));
  AnnotationRecord expected = baseline().records[0];
  expected.status = AnnotationStatus::accepted;
  CHECK(s.records[0] == expected);
  CHECK(s.records[1] == baseline().records[1]);
}

TEST_CASE("reject keeps the record") {
  const AnnotationSet s = apply_action(baseline(), act(1, ActionKind::reject, "d:1"));
  CHECK(s.records.size() == 3);
  CHECK(s.find("d:1")->status == AnnotationStatus::rejected);
}

TEST_CASE("edit_label fax_number to phone_number") {
  const AnnotationSet s =
      apply_action(baseline(), act(1, ActionKind::edit_label, "d:0", {{"old", "fax_number"}, {"new", "phone_number"}}));
  CHECK(s.find("d:0")->label_id == "phone_number");
  CHECK(s.find("d:0")->status == AnnotationStatus::edited);
  CHECK(s.find("d:0")->value_text == "(336) 335-7392");
}

TEST_CASE("transition table") {
  const std::vector<ActionKind> kinds = {ActionKind::accept, ActionKind::reject};
  SUBCASE("reject then accept") {
    const AnnotationSet s = apply_action(baseline(), act(1, ActionKind::reject, "d:0"));
    CHECK_THROWS_AS(apply_action(s, act(2, ActionKind::accept, "d:0")), InvalidTransitionError);
  }
  SUBCASE("terminal states allow nothing") {
    for (ActionKind first : kinds) {
      const AnnotationSet s = apply_action(baseline(), act(1, first, "d:0"));
      const ActionKind other = first == ActionKind::accept ? ActionKind::reject : ActionKind::accept;
      // repeating the verdict is a lost race, not a bad transition
      CHECK_THROWS_AS(apply_action(s, act(2, first, "d:0")), ConflictError);
      CHECK_THROWS_AS(apply_action(s, act(2, other, "d:0")), InvalidTransitionError);
      CHECK_THROWS_AS(apply_action(s, act(2, ActionKind::edit_text, "d:0", {{"old", "(336) 335-7392"}, {"new", "x"}})),
                      InvalidTransitionError);
      CHECK_THROWS_AS(apply_action(s, act(2, ActionKind::edit_label, "d:0", {{"old", "fax_number"}, {"new", "date"}})),
                      InvalidTransitionError);
    }
  }
  SUBCASE("edited records stay editable but cannot be accepted") {
    const AnnotationSet s =
        apply_action(baseline(), act(1, ActionKind::edit_text, "d:1", {{"old", "12/10/98"}, {"new", "12/11/98"}}));
    CHECK(s.find("d:1")->value_text == "12/11/98");
    const AnnotationSet t =
        apply_action(s, act(2, ActionKind::edit_box, "d:1", {{"old", {620, 200, 760, 230}}, {"new", {600, 200, 760, 230}}}));
    CHECK(t.find("d:1")->value_box == BBox{600, 200, 760, 230});
    CHECK(t.find("d:1")->status == AnnotationStatus::edited);
    CHECK_THROWS_AS(apply_action(t, act(3, ActionKind::accept, "d:1")), InvalidTransitionError);
  }
}

TEST_CASE("stale old values and expected_status conflict") {
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::edit_label, "d:0", {{"old", "date"}, {"new", "phone_number"}})),
                  ConflictError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::accept, "d:0", {{"expected_status", "edited"}})),
                  ConflictError);
  CHECK_NOTHROW(apply_action(baseline(), act(1, ActionKind::accept, "d:0", {{"expected_status", "auto"}})));
}

TEST_CASE("relink replaces the label and key entity") {
  const AnnotationSet s = apply_action(
      baseline(), act(1, ActionKind::relink, "d:2", {{"old", "to"}, {"new", "date"}, {"old_key_entity", 0}, {"new_key_entity", 6}}));
  CHECK(s.find("d:2")->label_id == "date");
  CHECK(s.find("d:2")->source_key_entity == 6);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::relink, "d:2", {{"old", "to"}, {"new", "date"}, {"old_key_entity", 3}})),
                  ConflictError);
}

TEST_CASE("add creates an edited record") {
  const AnnotationSet s = apply_action(
      baseline(), act(1, ActionKind::add, std::nullopt,
                      {{"annotation", {{"id", "d:9"}, {"label", "phone_number"}, {"text", "555"}, {"box", {1, 2, 3, 4}}}}}));
  REQUIRE(s.records.size() == 4);
  CHECK(s.records[3].status == AnnotationStatus::edited);
  CHECK(s.records[3].value_box == BBox{1, 2, 3, 4});
  CHECK_FALSE(s.records[3].source_key_entity.has_value());
  CHECK_THROWS_AS(apply_action(s, act(2, ActionKind::add, std::nullopt,
                                      {{"annotation", {{"id", "d:9"}, {"label", "x"}, {"text", "y"}, {"box", {1, 2, 3, 4}}}}})),
                  ConflictError);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::accept, "nope")), NotFoundError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::accept, std::nullopt)), FormatError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::edit_label, "d:0", {{"new", "date"}})), FormatError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::edit_label, "d:0", {{"old", "fax_number"}, {"new", "Not Normal"}})),
                  FormatError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::edit_box, "d:0", {{"old", {300, 320, 500, 350}}, {"new", {5, 5, 1, 1}}})),
                  FormatError);
  CHECK_THROWS_AS(apply_action(baseline(), act(1, ActionKind::edit_text, "d:0", {{"old", "(336) 335-7392"}, {"new", " "}})),
                  FormatError);
}

TEST_CASE("replay basics") {
  CHECK(replay(baseline(), {}) == baseline());
  const std::vector<ReviewAction> one = {act(1, ActionKind::accept, "d:2")};
  CHECK(replay(baseline(), one).find("d:2")->status == AnnotationStatus::accepted);
}

TEST_CASE("replay reports the failing action") {
  const std::vector<ReviewAction> log = {act(3, ActionKind::reject, "d:0"), act(8, ActionKind::accept, "d:0")};
  try {
    replay(baseline(), log);
    FAIL("expected a replay error");
  } catch (const ReplayError& e) {
    CHECK(e.action_id() == 8);
  }
  const std::vector<ReviewAction> unordered = {act(5, ActionKind::accept, "d:0"), act(4, ActionKind::accept, "d:1")};
  CHECK_THROWS_AS(replay(baseline(), unordered), ReplayError);
}

TEST_CASE("random valid sequences: replay equals incremental state and the mirror model") {
  std::mt19937_64 rng(71);
  for (int seq = 0; seq < 100; ++seq) {
    CAPTURE(seq);
    Mirror mirror(baseline());
    AnnotationSet state = baseline();
    std::vector<ReviewAction> log;
    int added = 0;
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    for (int i = 0; i < n; ++i) {
      log.push_back(random_valid_action(rng, mirror, 10 + 3 * i, added));
      state = apply_action(std::move(state), log.back());
    }
    CHECK(replay(baseline(), log) == state);
    check_against_mirror(state, mirror);
  }
}

TEST_CASE("complete means no automatic records remain") {
  CHECK_FALSE(AnnotationSet{}.complete());
  AnnotationSet s = baseline();
  CHECK_FALSE(s.complete());
  for (const char* id : {"d:0", "d:1"}) s = apply_action(s, act(1, ActionKind::accept, id));
  CHECK_FALSE(s.complete());
  s = apply_action(s, act(2, ActionKind::reject, "d:2"));
  CHECK(s.complete());
}

TEST_CASE("action kind names") {
  for (auto k : {ActionKind::accept, ActionKind::reject, ActionKind::edit_label, ActionKind::edit_box, ActionKind::edit_text,
                 ActionKind::relink, ActionKind::add})
    CHECK(parse_action_kind(to_string(k)) == k);
  CHECK_FALSE(parse_action_kind("delete").has_value());
}
