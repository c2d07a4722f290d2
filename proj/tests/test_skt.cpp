#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "sfusion/re_parser.hpp"
#include "sfusion/skt.hpp"

#include <fstream>

using namespace sfusion;

namespace {

Sample named(std::vector<std::string> names) {
  Sample s;
  s.id = "n";
  s.sentence = s.paragraph = "x";
  for (std::size_t i = 0; i < names.size(); ++i) s.spans.push_back({SpanId(i), names[i]});
  return s;
}

const char* effect_word(RelationLabel l) {
  switch (l) {
    case RelationLabel::POS: return "positive";
    case RelationLabel::NEG: return "negative";
    default: return "not yet clear";
  }
}

}  // namespace

TEST_CASE("published exemplar sentence is reproduced") {
  auto s = named({"Tanespimycin", "trastuzumab"});
  auto rel = relation_from_json(nlohmann::ordered_json::parse(R"({"class": "POS", "spans": [0,1]})"), "exemplar");
  auto facts = transform_corpus({{"n", {rel}}}, Corpus{DatasetKind::DCE, {s}},
                                FactTemplate::for_kind(DatasetKind::DCE));
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].text ==
        std::string("Tanespimycin and trastuzumab are used in combination, and the effects of the "
                    "combination are positive") + ".");
}

TEST_CASE("span mapping follows identifier order") {
  auto s = reference_dce();
  auto base = EntityBase::from_sample(s);
  auto m = map_spans({make_relation(RelationLabel::POS, {2, 0}), s.id}, base);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == EntityAttributes{0, "mycophenolate"});
  CHECK(m[1] == EntityAttributes{2, "corticosteroids"});
  try {
    map_spans({make_relation(RelationLabel::POS, {0, 9}), s.id}, base);
    FAIL("expected unresolved identifier");
  } catch (const UnresolvedIdentifier& e) {
    CHECK(e.span_id == 9);
  }
}

TEST_CASE("reference sample gold gives three facts naming corticosteroids") {
  auto s = reference_dce();
  auto facts = transform_corpus({{s.id, s.gold}}, Corpus{DatasetKind::DCE, {s}},
                                FactTemplate::for_kind(DatasetKind::DCE));
  REQUIRE(facts.size() == 3);
  for (const auto& f : facts) {
    CHECK(f.text.find("corticosteroids") != std::string::npos);
    CHECK(f.sample_id == s.id);
    CHECK(f.context == "DCE");
  }
}

TEST_CASE("sample 257 gives four positive facts with chemotherapy") {
  auto c = load_corpus(fixture("edce_test.jsonl"), DatasetKind::DCE);
  const auto* s = c.find("257");
  REQUIRE(s);
  auto facts = transform_corpus({{"257", s->gold}}, c, FactTemplate::for_kind(DatasetKind::DCE));
  REQUIRE(facts.size() == 4);
  const char* drugs[] = {"trastuzumab", "pertuzumab", "bevacizumab", "lapatinib"};
  for (int i = 0; i < 4; ++i) {
    CHECK(facts[i].text == std::string(drugs[i]) +
                               " and chemotherapy are used in combination, and the effects of the "
                               "combination are positive.");
  }
}

TEST_CASE("NO_COMB relations are skipped and bad ones are reported with the sample") {
  auto s = named({"a", "b", "c"});
  Corpus c{DatasetKind::DCE, {s}};
  auto tmpl = FactTemplate::for_kind(DatasetKind::DCE);
  CHECK(transform_corpus({{"n", {make_relation(RelationLabel::NO_COMB, {0, 1})}}}, c, tmpl).empty());
  CHECK_THROWS_WITH_AS(transform_corpus({{"n", {make_relation(RelationLabel::POS, {0, 5})}}}, c, tmpl),
                       doctest::Contains("sample 'n'"), DataError);
  CHECK_THROWS_AS(integrate({{0, "a"}}, RelationLabel::POS, tmpl), DataError);
}

TEST_CASE("entity names with template-like text are not rescanned") {
  auto tmpl = FactTemplate::for_kind(DatasetKind::DCE);
  auto text = tmpl.render({"{effect}", "b"}, RelationLabel::NEG);
  CHECK(text.starts_with("{effect} and b are"));
  auto inv = tmpl.invert(text);
  REQUIRE(inv);
  CHECK(inv->entities == std::vector<std::string>{"{effect}", "b"});
}

TEST_CASE("inversion round-trips 500 random relations") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pool{"aspirin",   "5-fluorouracil", "interferon alfa", "IL-2",
                                      "tamoxifen", "vitamin D3",     "R-CHOP",          "zinc"};
  auto s = named(pool);
  Corpus c{DatasetKind::DCE, {s}};
  auto tmpl = FactTemplate::for_kind(DatasetKind::DCE);
  for (int round = 0; round < 500; ++round) {
    std::vector<SpanId> ids;
    const int arity = 2 + static_cast<int>(rng() % 4);
    while (static_cast<int>(ids.size()) < arity) {
      SpanId id = static_cast<SpanId>(rng() % pool.size());
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    auto rel = make_relation(kAllLabels[rng() % 3], ids);
    auto facts = transform_corpus({{"n", {rel}}}, c, tmpl);
    REQUIRE(facts.size() == 1);

    // Independent read-back by plain string splitting.
    auto back = oracle::read_dce_fact(facts[0].text);
    REQUIRE(back);
    CHECK(back->effect == effect_word(rel.label));
    std::vector<SpanId> recovered;
    for (const auto& name : back->entities) {
      auto it = std::find(pool.begin(), pool.end(), name);
      REQUIRE(it != pool.end());
      recovered.push_back(it - pool.begin());
    }
    CHECK(make_relation(rel.label, recovered) == rel);

    auto inv = tmpl.invert(facts[0].text);
    REQUIRE(inv);
    CHECK(inv->label == rel.label);
    CHECK(inv->entities == back->entities);
  }
}

TEST_CASE("MEE template puts the last span as moderator and inverts") {
  auto s = named({"Signal Type", "Sender Impression", "Signal Frequency"});
  auto tmpl = FactTemplate::for_kind(DatasetKind::MEE);
  auto facts = transform_corpus({{"n", {make_relation(RelationLabel::POS, {0, 1, 2})}}},
                                Corpus{DatasetKind::MEE, {s}}, tmpl);
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].text.starts_with("Signal Frequency moderates the relationship involving Signal Type and Sender Impression"));
  auto inv = tmpl.invert(facts[0].text);
  REQUIRE(inv);
  CHECK(inv->entities == std::vector<std::string>{"Signal Type", "Sender Impression", "Signal Frequency"});
  CHECK(inv->label == RelationLabel::POS);
}

TEST_CASE("template file overrides wording") {
  auto dir = scratch_dir("fact");
  std::ofstream(dir / "fact.txt") << "{entities} combined: {effect}.\ngood\nbad\nunknown\n";
  auto t = FactTemplate::from_file(dir / "fact.txt", DatasetKind::DCE);
  CHECK(t.render({"a", "b"}, RelationLabel::NEG) == "a and b combined: bad.");
  CHECK(t.invert("a and b combined: unknown.")->label == RelationLabel::COMB);
  std::ofstream(dir / "bad.txt") << "no placeholders\n";
  CHECK_THROWS_AS(FactTemplate::from_file(dir / "bad.txt", DatasetKind::DCE), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fact records round trip with their structured form") {
  auto s = reference_dce();
  auto facts = transform_corpus({{s.id, s.gold}}, Corpus{DatasetKind::DCE, {s}},
                                FactTemplate::for_kind(DatasetKind::DCE));
  CHECK(structured_form(facts[0]) == R"([{"class": "POS", "spans": [0, 2]}])");
  for (const auto& f : facts) CHECK(fact_from_json(fact_to_json(f)) == f);
}
