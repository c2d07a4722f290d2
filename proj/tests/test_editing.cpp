#include "doctest.h"
#include "helpers.hpp"
#include "sfusion/editing.hpp"

using namespace sfusion;

namespace {

struct Fixture {
  Corpus test = load_corpus(fixture("edce_test.jsonl"), DatasetKind::DCE);
  Corpus train = load_corpus(fixture("edce_train.jsonl"), DatasetKind::DCE);
  FactTemplate tmpl = FactTemplate::for_kind(DatasetKind::DCE);
  std::string question = default_question(DatasetKind::DCE);

  std::vector<NaturalFact> gold_facts() const {
    Predictions p;
    for (const auto& s : test.samples) p[s.id] = s.gold;
    return transform_corpus(p, test, tmpl);
  }
};

}  // namespace

TEST_CASE("QA pairs carry the sentence, question and expected combinations") {
  Fixture f;
  auto pairs = generate_qa_pairs(f.gold_facts(), f.test, f.tmpl, f.question);
  REQUIRE(pairs.size() == 4);  // sample 304 has no facts
  const auto& p = pairs[0];
  CHECK(p.sample_id == "257");
  CHECK(p.question.ends_with(" Which drug combinations are mentioned and what are the effects of each combination?"));
  CHECK(p.question.starts_with(f.test.find("257")->sentence));
  REQUIRE(p.expected.size() == 4);
  for (const auto& combo : p.expected) {
    CHECK(combo.effect == RelationLabel::POS);
    CHECK(std::find(combo.entities.begin(), combo.entities.end(), "chemotherapy") != combo.entities.end());
  }
}

TEST_CASE("facts for unknown samples are rejected") {
  Fixture f;
  auto facts = f.gold_facts();
  facts[0].sample_id = "nope";
  CHECK_THROWS_AS(generate_qa_pairs(facts, f.test, f.tmpl, f.question), DataError);
}

TEST_CASE("demonstration pool is seeded and capped") {
  Fixture f;
  auto a = build_demonstration_pool(f.train, f.tmpl, f.question, 3, 7);
  auto b = build_demonstration_pool(f.train, f.tmpl, f.question, 3, 7);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].question == b[i].question);
  CHECK(build_demonstration_pool(f.train, f.tmpl, f.question, 100, 7).size() == 4);
}

TEST_CASE("edit prompt layout and alignment flag") {
  Fixture f;
  auto demos = build_demonstration_pool(f.train, f.tmpl, f.question, 2, 1);
  auto pairs = generate_qa_pairs(f.gold_facts(), f.test, f.tmpl, f.question);
  auto ctx = build_edit_context(demos, pairs[0].facts, pairs[0].question, "257");
  CHECK(ctx.l_align == 1);
  CHECK(ctx.prompt.starts_with("New Fact: "));
  CHECK(ctx.prompt.ends_with("\nQ: " + pairs[0].question + "\nA:"));
  std::size_t blocks = 0;
  for (auto pos = ctx.prompt.find("New Fact: "); pos != std::string::npos;
       pos = ctx.prompt.find("New Fact: ", pos + 1))
    ++blocks;
  CHECK(blocks == 3);
  CHECK(last_injected_facts(ctx.prompt) == pairs[0].facts[0].text + " " + pairs[0].facts[1].text + " " +
                                                pairs[0].facts[2].text + " " + pairs[0].facts[3].text);

  auto other = build_edit_context(demos, pairs[1].facts, pairs[0].question, "257");
  CHECK(other.l_align == 0);
  CHECK_THROWS_AS(build_edit_context(demos, pairs[0].facts, "  ", "257"), UsageError);
}

TEST_CASE("structured knowledge form injects canonical relation text") {
  Fixture f;
  auto pairs = generate_qa_pairs(f.gold_facts(), f.test, f.tmpl, f.question);
  auto ctx = build_edit_context({}, pairs[1].facts, pairs[1].question, pairs[1].sample_id,
                                KnowledgeForm::Structured);
  CHECK(ctx.prompt.starts_with("New Fact: [{\"class\": \"NEG\", \"spans\": [0, 1]}]\n"));
}

TEST_CASE("edited QA records backend errors per answer") {
  Fixture f;
  auto pairs = generate_qa_pairs(f.gold_facts(), f.test, f.tmpl, f.question);
  std::vector<EditContext> ctxs;
  for (const auto& p : pairs) ctxs.push_back(build_edit_context({}, p.facts, p.question, p.sample_id));
  MockScript s;
  s.rules.push_back({"cisplatin", "cisplatin and gemcitabine: negative."});
  MockBackend m(s);
  auto answers = run_edited_qa(m, ctxs, {});
  REQUIRE(answers.size() == 4);
  CHECK(answers[1].text == "cisplatin and gemcitabine: negative.");
  CHECK(!answers[1].error);
  CHECK(answers[0].error);
  auto round = answer_from_json(answer_to_json(answers[0]));
  CHECK(round.sample_id == answers[0].sample_id);
  CHECK(round.error == answers[0].error);
}
