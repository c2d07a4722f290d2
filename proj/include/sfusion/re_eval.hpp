#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfusion/assignment.hpp"
#include "sfusion/corpus.hpp"

namespace sfusion {

// Binary encodings of the four labels used for relation F1.
enum class BinaryEncoding { PositiveCombination, AnyCombination };

enum class MatchMode { Exact, Partial };

const char* to_string(BinaryEncoding encoding);
const char* to_string(MatchMode mode);

// POS counts under both encodings; NEG and COMB only under AnyCombination.
int encode_label(RelationLabel label, BinaryEncoding encoding);

// Shared span ids between two relations.
std::size_t span_overlap(const Relation& a, const Relation& b);

// Minimum shared spans for a Partial pair.
inline constexpr std::size_t kMinPartialOverlap = 2;

/// Pairs gold with predicted relations, each used at most once. Exact pairs
/// need identical span sets, Partial pairs at least two shared spans. The
/// pairing maximizes total shared spans, then the number of pairs; remaining
/// ties resolve toward lower indices.
Pairing match_relations(const std::vector<Relation>& gold, const std::vector<Relation>& predicted,
                        MatchMode mode);

struct F1Report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  // Samples scored with an empty prediction because none was supplied.
  std::vector<std::string> missing_predictions;

  bool operator==(const F1Report&) const = default;
};

using Predictions = std::map<std::string, std::vector<Relation>>;

struct SampleCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Counts for one sample; relations that encode to 0 are dropped first.
SampleCounts count_sample(const std::vector<Relation>& gold, const std::vector<Relation>& predicted,
                          MatchMode mode, BinaryEncoding encoding);

F1Report finalize_f1(std::size_t matched, std::size_t predicted, std::size_t gold);

/// Micro-averaged F1 over the corpus. Per-sample scoring runs in parallel.
F1Report compute_f1(const Corpus& corpus, const Predictions& predictions, MatchMode mode,
                    BinaryEncoding encoding);

// Single-threaded reference for compute_f1.
F1Report compute_f1_serial(const Corpus& corpus, const Predictions& predictions, MatchMode mode,
                           BinaryEncoding encoding);

// The four cells of the relation-extraction table.
struct F1Table {
  F1Report positive_exact, positive_partial, any_exact, any_partial;
};

F1Table compute_f1_table(const Corpus& corpus, const Predictions& predictions);

nlohmann::ordered_json to_json(const F1Table& table);
std::string format_table(const F1Table& table);

}  // namespace sfusion
