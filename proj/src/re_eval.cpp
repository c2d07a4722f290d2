#include "sfusion/re_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>

namespace sfusion {

const char* to_string(BinaryEncoding encoding) {
  return encoding == BinaryEncoding::PositiveCombination ? "positive_combination"
                                                         : "any_combination";
}

const char* to_string(MatchMode mode) { return mode == MatchMode::Exact ? "exact" : "partial"; }

int encode_label(RelationLabel label, BinaryEncoding encoding) {
  switch (label) {
    case RelationLabel::POS: return 1;
    case RelationLabel::NEG:
    case RelationLabel::COMB: return encoding == BinaryEncoding::AnyCombination ? 1 : 0;
    case RelationLabel::NO_COMB: return 0;
  }
  return 0;
}

std::size_t span_overlap(const Relation& a, const Relation& b) {
  std::vector<SpanId> common;
  std::set_intersection(a.spans.begin(), a.spans.end(), b.spans.begin(), b.spans.end(),
                        std::back_inserter(common));
  return common.size();
}

Pairing match_relations(const std::vector<Relation>& gold, const std::vector<Relation>& predicted,
                        MatchMode mode) {
  // Overlap first, then the number of pairs among equally overlapping pairings.
  const auto per_pair = static_cast<std::int64_t>(std::min(gold.size(), predicted.size())) + 1;
  WeightMatrix w(gold.size(), std::vector<std::int64_t>(predicted.size(), 0));
  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      const auto overlap = span_overlap(gold[g], predicted[p]);
      const bool eligible = mode == MatchMode::Exact ? gold[g].spans == predicted[p].spans
                                                     : overlap >= kMinPartialOverlap;
      if (eligible) w[g][p] = static_cast<std::int64_t>(overlap) * per_pair + 1;
    }
  }
  return max_weight_pairing(w, predicted.size());
}

SampleCounts count_sample(const std::vector<Relation>& gold, const std::vector<Relation>& predicted,
                          MatchMode mode, BinaryEncoding encoding) {
  auto keep = [encoding](const std::vector<Relation>& in) {
    std::vector<Relation> out;
    std::copy_if(in.begin(), in.end(), std::back_inserter(out),
                 [encoding](const Relation& r) { return encode_label(r.label, encoding) == 1; });
    return out;
  };
  const auto g = keep(gold);
  const auto p = keep(predicted);
  // Both sides of every pair encode to 1, so encoded labels always agree.
  return SampleCounts{match_relations(g, p, mode).size(), p.size(), g.size()};
}

F1Report finalize_f1(std::size_t matched, std::size_t predicted, std::size_t gold) {
  F1Report r;
  r.matched = matched;
  r.predicted = predicted;
  r.gold = gold;
  r.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  r.recall = gold ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

const std::vector<Relation> kNoRelations;

const std::vector<Relation>& prediction_for(const Predictions& predictions, const Sample& s) {
  auto it = predictions.find(s.id);
  return it == predictions.end() ? kNoRelations : it->second;
}

std::vector<std::string> missing_ids(const Corpus& corpus, const Predictions& predictions) {
  std::vector<std::string> out;
  for (const auto& s : corpus.samples) {
    if (!predictions.count(s.id)) out.push_back(s.id);
  }
  return out;
}

}  // namespace

F1Report compute_f1(const Corpus& corpus, const Predictions& predictions, MatchMode mode,
                    BinaryEncoding encoding) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.samples.size());
  std::size_t matched = 0, predicted = 0, gold = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : matched, predicted, gold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = corpus.samples[static_cast<std::size_t>(i)];
    const auto c = count_sample(s.gold, prediction_for(predictions, s), mode, encoding);
    matched += c.matched;
    predicted += c.predicted;
    gold += c.gold;
  }
  auto report = finalize_f1(matched, predicted, gold);
  report.missing_predictions = missing_ids(corpus, predictions);
  return report;
}

F1Report compute_f1_serial(const Corpus& corpus, const Predictions& predictions, MatchMode mode,
                           BinaryEncoding encoding) {
  std::size_t matched = 0, predicted = 0, gold = 0;
  for (const auto& s : corpus.samples) {
    const auto c = count_sample(s.gold, prediction_for(predictions, s), mode, encoding);
    matched += c.matched;
    predicted += c.predicted;
    gold += c.gold;
  }
  auto report = finalize_f1(matched, predicted, gold);
  report.missing_predictions = missing_ids(corpus, predictions);
  return report;
}

F1Table compute_f1_table(const Corpus& corpus, const Predictions& predictions) {
  using enum BinaryEncoding;
  using enum MatchMode;
  return F1Table{compute_f1(corpus, predictions, Exact, PositiveCombination),
                 compute_f1(corpus, predictions, Partial, PositiveCombination),
                 compute_f1(corpus, predictions, Exact, AnyCombination),
                 compute_f1(corpus, predictions, Partial, AnyCombination)};
}

namespace {

nlohmann::ordered_json cell(const F1Report& r) {
  nlohmann::ordered_json j;
  j["f1"] = r.f1 * 100.0;
  j["precision"] = r.precision * 100.0;
  j["recall"] = r.recall * 100.0;
  j["matched"] = r.matched;
  j["predicted"] = r.predicted;
  j["gold"] = r.gold;
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const F1Table& t) {
  nlohmann::ordered_json j;
  j["positive_combination"]["exact"] = cell(t.positive_exact);
  j["positive_combination"]["partial"] = cell(t.positive_partial);
  j["any_combination"]["exact"] = cell(t.any_exact);
  j["any_combination"]["partial"] = cell(t.any_partial);
  j["missing_predictions"] = t.positive_exact.missing_predictions;
  return j;
}

std::string format_table(const F1Table& t) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%-28s %-28s\n%-13s %-14s %-13s %-14s\n%-13.1f %-14.1f %-13.1f %-14.1f\n",
                "Positive Combination F1", "Any Combination F1", "Exact Match", "Partial Match",
                "Exact Match", "Partial Match", t.positive_exact.f1 * 100.0,
                t.positive_partial.f1 * 100.0, t.any_exact.f1 * 100.0, t.any_partial.f1 * 100.0);
  std::string out = buf;
  if (!t.positive_exact.missing_predictions.empty()) {
    out += "warning: " + std::to_string(t.positive_exact.missing_predictions.size()) +
           " sample(s) missing a prediction were scored as empty\n";
  }
  return out;
}

}  // namespace sfusion
