#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "docseed/error.hpp"
#include "docseed/ingest.hpp"
#include "docseed/synth.hpp"

using namespace docseed;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DOCSEED_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kHeader = "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext\n";
const std::string kPageRow = "1\t1\t0\t0\t0\t0\t0\t0\t850\t1100\t-1\t\n";

}  // namespace

TEST_CASE("TSV word row maps to a token") {
  const Document doc = parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\t100\t200\t60\t30\t96.5\tTo:\n", "d");
  REQUIRE(doc.tokens.size() == 1);
  CHECK(doc.tokens[0].text == "To:");
  CHECK(doc.tokens[0].box == BBox{100, 200, 160, 230});
  REQUIRE(doc.tokens[0].ocr_confidence);
  CHECK(*doc.tokens[0].ocr_confidence == doctest::Approx(0.965).epsilon(1e-12));
  CHECK(doc.page == Page{850, 1100, std::nullopt});
}

TEST_CASE("TSV with only a page row has no tokens") {
  const Document doc = parse_ocr_tsv(kHeader + kPageRow);
  CHECK(doc.tokens.empty());
  CHECK(doc.page.width == 850);
}

TEST_CASE("TSV conf -1 means absent") {
  const Document doc = parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\t10\t10\t20\t20\t-1\tword\n");
  CHECK_FALSE(doc.tokens[0].ocr_confidence.has_value());
}

TEST_CASE("TSV fixture file") {
  const Document doc = parse_ocr_tsv(slurp(kData / "tsv/fax_mini.tsv"), "fax-mini");
  const auto [fax, gold] = fax_mini_form();
  REQUIRE(doc.tokens.size() == fax.tokens.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    CHECK(doc.tokens[i].text == fax.tokens[i].text);
    CHECK(doc.tokens[i].box == fax.tokens[i].box);
  }
  CHECK(doc.page == fax.page);
  CHECK_FALSE(doc.tokens[4].ocr_confidence.has_value());
  CHECK(*doc.tokens[10].ocr_confidence == 1.0);
}

TEST_CASE("TSV format errors carry line numbers") {
  CHECK_THROWS_AS(parse_ocr_tsv("level\tpage_num\n"), FormatError);
  CHECK_THROWS_AS(parse_ocr_tsv(""), FormatError);
  try {
    parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\tabc\t10\t20\t20\t90\tword\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_ocr_tsv(kHeader + "5\t1\t1\t1\t1\t1\t10\t10\t20\t20\t90\tword\n"), FormatError);
  CHECK_THROWS_AS(parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\t840\t10\t20\t20\t90\tword\n"), FormatError);
  CHECK_THROWS_AS(parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\t10\t10\t20\t20\t140\tword\n"), FormatError);
  CHECK_THROWS_AS(parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t10\t10\t20\t20\t90\tword\n"), FormatError);
}

TEST_CASE("TSV blank words are dropped and indices stay contiguous") {
  const Document doc = parse_ocr_tsv(kHeader + kPageRow + "5\t1\t1\t1\t1\t1\t10\t10\t20\t20\t90\t  \n" +
                                     "5\t1\t1\t1\t1\t2\t40\t10\t20\t20\t90\tb\n" + "4\t1\t1\t1\t1\t0\t10\t10\t50\t20\t-1\t\n");
  REQUIRE(doc.tokens.size() == 1);
  CHECK(doc.tokens[0].index == 0);
  CHECK(doc.tokens[0].text == "b");
}

TEST_CASE("multi-page TSV splits into documents") {
  const std::string content = slurp(kData / "tsv/two_pages.tsv");
  CHECK_THROWS_AS(parse_ocr_tsv(content, "scan"), FormatError);
  const auto pages = parse_ocr_tsv_pages(content, "scan");
  REQUIRE(pages.size() == 2);
  CHECK(pages[0].doc_id == "scan-p1");
  CHECK(pages[1].doc_id == "scan-p2");
  CHECK(pages[1].tokens[1].text == "two");
  CHECK(pages[1].tokens[1].index == 1);
}

TEST_CASE("FUNSD fax fixture equals the built-in fax form") {
  const auto [doc, gold] = parse_funsd(slurp(kData / "funsd/fax_mini.json"), "fax-mini");
  const auto [fax, fax_gold] = fax_mini_form();
  CHECK(doc == fax);
  CHECK(gold == fax_gold);
}

TEST_CASE("FUNSD question/answer link") {
  const std::string content = R"j({"form": [
    {"id": 0, "text": "Fax Number:", "box": [100,320,270,350], "label": "question",
     "words": [{"text": "Fax", "box": [100,320,150,350]}, {"text": "Number:", "box": [160,320,270,350]}],
     "linking": [[0, 1]]},
    {"id": 1, "text": "(336) 335-7392", "box": [300,320,500,350], "label": "answer",
     "words": [{"text": "(336)", "box": [300,320,370,350]}, {"text": "335-7392", "box": [380,320,500,350]}],
     "linking": [[0, 1]]}]})j";
  const auto [doc, gold] = parse_funsd(content, "x");
  REQUIRE(gold.entities.size() == 2);
  CHECK(gold.entities[0].label == GenericLabel::key);
  CHECK(gold.entities[1].label == GenericLabel::value);
  CHECK(gold.links == std::vector<Link>{{0, 1}});
  CHECK(doc.tokens.size() == 4);
  CHECK(doc.page == Page{500, 350, std::nullopt});
}

TEST_CASE("FUNSD single other entity") {
  const auto [doc, gold] = parse_funsd(
      R"j({"form": [{"id": 3, "text": "hi", "box": [0,0,5,5], "label": "other", "words": [{"text": "hi", "box": [0,0,5,5]}], "linking": []}]})j",
      "x");
  CHECK(gold.entities.size() == 1);
  CHECK(gold.links.empty());
}

TEST_CASE("FUNSD sample: reversed, duplicate and header links") {
  const auto [doc, gold] = parse_funsd(slurp(kData / "funsd/fax_cover.json"), "cover");
  // answer 2 lists [2,1]; question 1 lists [1,2]; header 0 lists [0,1].
  CHECK(gold.links == std::vector<Link>{{1, 2}, {3, 4}, {5, 7}});
  const Entity* other = gold.find(6);
  REQUIRE(other);
  CHECK(other->text == "CONFIDENTIAL");
  CHECK(other->token_indices.size() == 1);
  CHECK(gold.find(4)->text == "Winston Salem North Carolina");
  CHECK(gold.find(4)->box == BBox{130, 170, 275, 230});
  CHECK(doc.tokens.size() == 15);
}

TEST_CASE("FUNSD errors") {
  CHECK_THROWS_AS(parse_funsd(R"j({"form": [{"id": 0, "text": "a", "box": [0,0,1,1], "label": "key",
      "words": [{"text": "a", "box": [0,0,1,1]}], "linking": []}]})j", "x"), FormatError);
  CHECK_THROWS_AS(parse_funsd(R"j({"form": [{"id": 0, "text": "a", "box": [0,0,1,1], "label": "question",
      "words": [{"text": "a", "box": [0,0,1,1]}], "linking": [[0, 9]]}]})j", "x"), FormatError);
  CHECK_THROWS_AS(parse_funsd("{\"form\": 3}", "x"), FormatError);
  CHECK_THROWS_AS(parse_funsd("not json", "x"), FormatError);
}

TEST_CASE("export of an empty document") {
  const Document doc{"empty", {100, 100, std::nullopt}, {}};
  const auto j = nlohmann::json::parse(export_funsd(doc, GoldEntitySet{}));
  CHECK(j.at("form") == nlohmann::json::array());
  const auto [back, gold] = parse_funsd(export_funsd(doc, GoldEntitySet{}), "empty");
  CHECK(back == doc);
  CHECK(gold.entities.empty());
}

TEST_CASE("export/parse round trip on every bundled fixture") {
  for (const auto& entry : fs::directory_iterator(kData / "funsd")) {
    CAPTURE(entry.path().string());
    const auto [doc, gold] = parse_funsd(slurp(entry.path()), "rt");
    const auto [doc2, gold2] = parse_funsd(export_funsd(doc, gold), "rt");
    CHECK(doc2 == doc);
    CHECK(gold2 == gold);
  }
}

TEST_CASE("fax fixture export re-parses to 7 entities and 3 links") {
  const auto [doc, gold] = fax_mini_form();
  const auto [doc2, gold2] = parse_funsd(export_funsd(doc, gold.entities, gold.links), doc.doc_id);
  CHECK(gold2.entities.size() == 7);
  CHECK(gold2.links.size() == 3);
}

TEST_CASE("export/parse round trip on synthetic forms") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto [doc, gold] = synth_form(rng, "s" + std::to_string(i));
    const auto [doc2, gold2] = parse_funsd(export_funsd(doc, gold), doc.doc_id);
    CHECK(doc2 == doc);
    CHECK(gold2 == gold);
  }
}

TEST_CASE("uncovered tokens are exported as fill entities") {
  const auto [doc, gold] = fax_mini_form();
  GoldEntitySet partial;
  partial.entities = {gold.entities[4], gold.entities[5]};
  partial.links = {{4, 5}};
  const auto [doc2, gold2] = parse_funsd(export_funsd(doc, partial), doc.doc_id);
  CHECK(doc2 == doc);
  std::size_t covered = 0;
  for (const Entity& e : gold2.entities) covered += e.token_indices.size();
  CHECK(covered == doc.tokens.size());
  CHECK(gold2.links == partial.links);
}

TEST_CASE("document-specific label space") {
  const auto [doc, gold] = fax_mini_form();
  GoldEntitySet form = gold;
  form.specific_labels[5] = "fax_number";
  form.text_overrides[5] = "(336) 335 7392";
  const std::string text = export_funsd(doc, form);
  CHECK(nlohmann::json::parse(text).at("label_space") == "document_specific");
  const auto [doc2, gold2] = parse_funsd(text, doc.doc_id);
  CHECK(gold2 == form);
  CHECK(gold2.find(5)->label == GenericLabel::value);
}
