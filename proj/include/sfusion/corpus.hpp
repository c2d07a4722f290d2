#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sfusion/errors.hpp"

namespace sfusion {

using SpanId = std::int64_t;

enum class DatasetKind { DCE, MEE };

const char* to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);

enum class RelationLabel { POS, NEG, COMB, NO_COMB };

inline constexpr RelationLabel kAllLabels[] = {RelationLabel::POS, RelationLabel::NEG,
                                               RelationLabel::COMB, RelationLabel::NO_COMB};

const char* to_string(RelationLabel label);
std::optional<RelationLabel> parse_label(std::string_view text);

struct SpanMention {
  SpanId span_id = 0;
  std::string text;
  // Character and token offsets, DCE only.
  std::optional<std::int64_t> start;
  std::optional<std::int64_t> end;
  std::optional<std::int64_t> token_start;
  std::optional<std::int64_t> token_end;

  bool operator==(const SpanMention&) const = default;
};

struct Relation {
  RelationLabel label = RelationLabel::POS;
  // Sorted, duplicate-free. A relation is a set of participants.
  std::vector<SpanId> spans;
  std::optional<bool> is_context_needed;

  bool operator==(const Relation&) const = default;
};

// Builds a relation with its span list normalized to set order.
Relation make_relation(RelationLabel label, std::vector<SpanId> spans,
                       std::optional<bool> is_context_needed = std::nullopt);

struct Sample {
  std::string id;
  std::string sentence;
  std::vector<SpanMention> spans;
  std::string paragraph;
  std::vector<Relation> gold;
  // Key the sentence was read from ("sentence", or "result" in MEE exports).
  std::string sentence_key = "sentence";
  // Unrecognized record keys, kept verbatim for re-serialization.
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();

  const SpanMention* find_span(SpanId id) const;
  bool operator==(const Sample&) const = default;
};

struct Corpus {
  DatasetKind kind = DatasetKind::DCE;
  std::vector<Sample> samples;

  const Sample* find(std::string_view id) const;
  bool operator==(const Corpus&) const = default;
};

// Checks the Sample/Relation invariants; throws DataError naming `where`.
void validate_sample(const Sample& sample, const std::string& where);

Relation relation_from_json(const nlohmann::ordered_json& obj, const std::string& where);
nlohmann::ordered_json relation_to_json(const Relation& relation);

Sample sample_from_json(const nlohmann::ordered_json& record, DatasetKind kind, std::size_t index);
nlohmann::ordered_json sample_to_json(const Sample& sample);

// Parses a JSON array or JSON-lines document.
Corpus parse_corpus(std::string_view text, DatasetKind kind);
Corpus load_corpus(const std::filesystem::path& path, DatasetKind kind);

// JSON-lines, one sample per line, keys in a fixed order.
std::string serialize_corpus(const Corpus& corpus);

// Seeded, deterministic partition into (train, test). Each side keeps the
// original sample order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction,
                                       std::uint64_t seed);

}  // namespace sfusion
