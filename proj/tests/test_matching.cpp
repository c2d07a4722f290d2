#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "sfusion/assignment.hpp"
#include "sfusion/re_eval.hpp"

using namespace sfusion;

namespace {

Relation rel(RelationLabel l, std::vector<SpanId> s) { return make_relation(l, std::move(s)); }

std::vector<Relation> random_relations(std::mt19937_64& rng, int max_n, int spans) {
  std::vector<Relation> out;
  const int n = static_cast<int>(rng() % (max_n + 1));
  while (static_cast<int>(out.size()) < n) {
    std::vector<SpanId> ids;
    const int arity = 2 + static_cast<int>(rng() % 3);
    for (int a = 0; a < arity; ++a) ids.push_back(static_cast<SpanId>(rng() % spans));
    auto r = make_relation(kAllLabels[rng() % 4], ids);
    if (r.spans.size() >= 2) out.push_back(r);
  }
  return out;
}

Corpus corpus_with(std::vector<std::vector<Relation>> golds) {
  Corpus c;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.sentence = s.paragraph = "x";
    for (SpanId k = 0; k < 8; ++k) s.spans.push_back({k, "e" + std::to_string(k)});
    s.gold = golds[i];
    c.samples.push_back(s);
  }
  return c;
}

}  // namespace

TEST_CASE("label encoding matches the published table in all eight cells") {
  for (auto l : kAllLabels) {
    CHECK(encode_label(l, BinaryEncoding::PositiveCombination) == oracle::encoded(l, false));
    CHECK(encode_label(l, BinaryEncoding::AnyCombination) == oracle::encoded(l, true));
  }
  CHECK(encode_label(RelationLabel::POS, BinaryEncoding::PositiveCombination) == 1);
  CHECK(encode_label(RelationLabel::NEG, BinaryEncoding::PositiveCombination) == 0);
  CHECK(encode_label(RelationLabel::COMB, BinaryEncoding::AnyCombination) == 1);
  CHECK(encode_label(RelationLabel::NO_COMB, BinaryEncoding::AnyCombination) == 0);
}

TEST_CASE("pairing beats a greedy pick where greedy is suboptimal") {
  // Row 0 overlaps column 0 slightly more than column 1, but row 1 can only
  // use column 0. Taking the single heaviest cell first loses.
  WeightMatrix w{{3, 2}, {2, 0}};
  auto p = max_weight_pairing(w, 2);
  std::int64_t total = 0;
  for (auto [r, c] : p) total += w[r][c];
  CHECK(total == 4);
  CHECK(total == oracle::best_total(w, 2));
}

TEST_CASE("pairing is optimal, one-to-one and sorted on random matrices") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 400; ++round) {
    const std::size_t rows = rng() % 6, cols = rng() % 6;
    WeightMatrix w(rows, std::vector<std::int64_t>(cols));
    for (auto& row : w)
      for (auto& x : row) x = rng() % 3 == 0 ? 0 : static_cast<std::int64_t>(rng() % 7);
    auto p = max_weight_pairing(w, cols);
    std::int64_t total = 0;
    std::set<std::size_t> used_r, used_c;
    for (auto [r, c] : p) {
      CHECK(w[r][c] > 0);
      CHECK(used_r.insert(r).second);
      CHECK(used_c.insert(c).second);
      total += w[r][c];
    }
    CHECK(std::is_sorted(p.begin(), p.end()));
    CHECK(total == oracle::best_total(w, cols));
  }
}

TEST_CASE("pairing rejects malformed input") {
  CHECK_THROWS_AS(max_weight_pairing({{1, -1}}, 2), std::invalid_argument);
  CHECK_THROWS_AS(max_weight_pairing({{1, 1}, {1}}, 2), std::invalid_argument);
  CHECK(max_weight_pairing({}, 0).empty());
}

TEST_CASE("partial match needs two shared spans, exact needs equal sets") {
  std::vector<Relation> g{rel(RelationLabel::POS, {0, 1})};
  CHECK(match_relations(g, {rel(RelationLabel::POS, {0, 2})}, MatchMode::Partial).empty());
  CHECK(match_relations(g, {rel(RelationLabel::POS, {0, 1, 2})}, MatchMode::Partial).size() == 1);
  CHECK(match_relations(g, {rel(RelationLabel::POS, {0, 1, 2})}, MatchMode::Exact).empty());
  CHECK(match_relations(g, {rel(RelationLabel::POS, {1, 0})}, MatchMode::Exact).size() == 1);
}

TEST_CASE("per-sample counts agree with exhaustive enumeration") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 500; ++round) {
    auto g = random_relations(rng, 4, 6);
    auto p = random_relations(rng, 4, 6);
    for (auto mode : {MatchMode::Exact, MatchMode::Partial}) {
      for (auto enc : {BinaryEncoding::PositiveCombination, BinaryEncoding::AnyCombination}) {
        auto got = count_sample(g, p, mode, enc);
        auto want = oracle::re_counts(g, p, mode == MatchMode::Partial,
                                      enc == BinaryEncoding::AnyCombination);
        CHECK(got.matched == want.matched);
        CHECK(got.predicted == want.predicted);
        CHECK(got.gold == want.gold);
      }
    }
  }
}

TEST_CASE("hand fixture with one partial overlap and one label flip") {
  auto c = corpus_with({
      {rel(RelationLabel::POS, {0, 1}), rel(RelationLabel::POS, {2, 3})},
      {rel(RelationLabel::POS, {0, 1, 2})},
      {rel(RelationLabel::NEG, {4, 5})},
  });
  Predictions p{
      {"s0", {rel(RelationLabel::POS, {0, 1}), rel(RelationLabel::POS, {2, 3})}},
      {"s1", {rel(RelationLabel::POS, {0, 1, 3})}},  // partial only
      {"s2", {rel(RelationLabel::POS, {4, 5})}},     // label flip
  };
  for (auto mode : {MatchMode::Exact, MatchMode::Partial}) {
    for (auto enc : {BinaryEncoding::PositiveCombination, BinaryEncoding::AnyCombination}) {
      std::size_t tp = 0, np = 0, ng = 0;
      for (const auto& s : c.samples) {
        auto k = oracle::re_counts(s.gold, p[s.id], mode == MatchMode::Partial,
                                   enc == BinaryEncoding::AnyCombination);
        tp += k.matched;
        np += k.predicted;
        ng += k.gold;
      }
      CHECK(compute_f1(c, p, mode, enc).f1 == doctest::Approx(oracle::f1(tp, np, ng)));
    }
  }
  // Positive-combination exact: 2 of 4 predictions right, 2 of 3 gold found.
  auto r = compute_f1(c, p, MatchMode::Exact, BinaryEncoding::PositiveCombination);
  CHECK(r.matched == 2);
  CHECK(r.predicted == 4);
  CHECK(r.gold == 3);
  // Any-combination partial: every prediction pairs.
  CHECK(compute_f1(c, p, MatchMode::Partial, BinaryEncoding::AnyCombination).f1 == doctest::Approx(1.0));
}

TEST_CASE("gold as prediction scores 100 and empty predictions score 0") {
  auto c = load_corpus(fixture("edce_test.jsonl"), DatasetKind::DCE);
  Predictions gold;
  for (const auto& s : c.samples) gold[s.id] = s.gold;
  auto t = compute_f1_table(c, gold);
  for (const auto* r : {&t.positive_exact, &t.positive_partial, &t.any_exact, &t.any_partial}) {
    CHECK(r->f1 == doctest::Approx(1.0));
    CHECK(r->missing_predictions.empty());
  }
  auto e = compute_f1_table(c, {});
  CHECK(e.any_partial.f1 == 0.0);
  CHECK(e.any_partial.recall == 0.0);
  CHECK(e.any_partial.missing_predictions.size() == c.samples.size());
  CHECK(format_table(e).find("missing") != std::string::npos);
  CHECK(format_table(t).find("100.0") != std::string::npos);
}

TEST_CASE("no predicted and no gold positives gives zero, not NaN") {
  auto r = finalize_f1(0, 0, 0);
  CHECK(r.f1 == 0.0);
  CHECK(r.precision == 0.0);
}

TEST_CASE("OpenMP and serial F1 agree") {
  std::mt19937_64 rng(99);
  std::vector<std::vector<Relation>> golds;
  for (int i = 0; i < 300; ++i) golds.push_back(random_relations(rng, 5, 8));
  auto c = corpus_with(golds);
  Predictions p;
  for (const auto& s : c.samples)
    if (rng() % 10) p[s.id] = random_relations(rng, 5, 8);
  for (auto mode : {MatchMode::Exact, MatchMode::Partial}) {
    for (auto enc : {BinaryEncoding::PositiveCombination, BinaryEncoding::AnyCombination}) {
      CHECK(compute_f1(c, p, mode, enc) == compute_f1_serial(c, p, mode, enc));
    }
  }
}
