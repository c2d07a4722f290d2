#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "sfusion/assignment.hpp"
#include "sfusion/corpus.hpp"

namespace sfusion {

// One combination named in an answer: a set of entity names and its effect.
// An empty `effect` means the answer gave none (Unknown).
struct ComboAnswer {
  // Normalized (case-folded, trimmed, single-spaced), sorted, unique.
  std::vector<std::string> entities;
  std::optional<RelationLabel> effect;

  bool operator==(const ComboAnswer&) const = default;
};

std::string normalize_entity(std::string_view name);
ComboAnswer make_combo(const std::vector<std::string>& names, std::optional<RelationLabel> effect);

// True when the text declines to answer ("cannot determine", "not sure", ...).
bool is_refusal(std::string_view text);

/// Reads combinations out of a free-text answer.
///
/// The text is cut into sentences. A sentence naming two or more of the
/// sample's span texts (case-insensitive, whole words, longest match first)
/// yields one combination. Its effect comes from the first effect keyword in
/// that sentence, or from the next sentence when that one names no entity.
/// Refusals and texts with no such sentence give an empty list. Identical
/// (entities, effect) entries are collapsed.
std::vector<ComboAnswer> normalize_answer(std::string_view text, const Sample& sample);

// |S ∩ G| / |S|, or 0 when the two share at most one entity.
double combo_score(const ComboAnswer& standard, const ComboAnswer& generated);

struct SampleScore {
  std::string sample_id;
  // Per standard combination, in input order.
  std::vector<double> combo_scores;
  std::vector<int> effect_flags;
  std::vector<std::optional<std::size_t>> paired_with;
  // Mean of combo_score x effect flag.
  double d = 0.0;
};

/// Scores one sample. Standards are paired one-to-one with generated
/// combinations so that the summed combination score is maximal. A pair's
/// effect flag is 1 only when the effects agree and the generated entity set
/// is not also given a different effect elsewhere in the answer.
SampleScore sample_score(const std::vector<ComboAnswer>& standards,
                         const std::vector<ComboAnswer>& generated);

struct QaCase {
  std::string sample_id;
  std::vector<ComboAnswer> standards;
  std::vector<ComboAnswer> generated;
};

// sample_score over every case, in parallel. Output order matches input.
std::vector<SampleScore> score_cases(const std::vector<QaCase>& cases);
std::vector<SampleScore> score_cases_serial(const std::vector<QaCase>& cases);

struct SampleAccuracy {
  std::string sample_id;
  double d = 0.0;
  bool adjudicated = false;
  std::string note;
};

struct AccuracyReport {
  double total = 0.0;  // sum of D over samples, divided by n
  std::size_t n = 0;
  double final_accuracy = 0.0;  // equals total; each sample can score at most 1
  std::vector<SampleAccuracy> samples;
};

AccuracyReport corpus_accuracy(const std::vector<SampleScore>& scores);

// Human verdict replacing one sample's automatic score.
struct Adjudication {
  std::string sample_id;
  double d = 0.0;
  std::string note;
};

// JSON-lines of {sample_id, D, note}.
std::vector<Adjudication> load_adjudications(const std::filesystem::path& path);

AccuracyReport apply_adjudication(const AccuracyReport& report,
                                  const std::vector<Adjudication>& overrides);

nlohmann::ordered_json to_json(const AccuracyReport& report);
std::string format_report(const AccuracyReport& report);

nlohmann::ordered_json combo_to_json(const ComboAnswer& combo);

}  // namespace sfusion
