#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfusion/corpus.hpp"
#include "sfusion/re_eval.hpp"

namespace sfusion {

// An extracted relation tied to the sample it was read from.
struct StructuredKnowledge {
  Relation relation;
  std::string sample_id;
};

// Entity lookup built from a sample's span list.
struct EntityBase {
  std::map<SpanId, SpanMention> entries;

  static EntityBase from_sample(const Sample& sample);
};

struct EntityAttributes {
  SpanId span_id = 0;
  std::string text;

  bool operator==(const EntityAttributes&) const = default;
};

struct UnresolvedIdentifier : public DataError {
  SpanId span_id;
  explicit UnresolvedIdentifier(SpanId id)
      : DataError("unresolved span identifier " + std::to_string(id)), span_id(id) {}
};

// Looks up every span id of the relation, in ascending id order.
std::vector<EntityAttributes> map_spans(const StructuredKnowledge& knowledge,
                                        const EntityBase& entities);

/// Sentence pattern for one dataset. Placeholders: {entities} (joined with
/// " and "), {effect}, and optionally {moderator}, which takes the last
/// entity and leaves the rest to {entities}.
struct FactTemplate {
  std::string name;
  std::string pattern;
  // Effect phrases for POS, NEG and COMB.
  std::array<std::string, 3> effects;

  static FactTemplate for_kind(DatasetKind kind);
  // First line replaces the pattern; lines two to four, when present, the
  // effect phrases.
  static FactTemplate from_file(const std::filesystem::path& path, DatasetKind kind);

  bool has_moderator() const;
  std::string render(const std::vector<std::string>& entities, RelationLabel label) const;

  struct Inverted {
    std::vector<std::string> entities;
    RelationLabel label;
  };
  // Reads a rendered sentence back into entities and label.
  std::optional<Inverted> invert(const std::string& text) const;
};

struct NaturalFact {
  std::string text;
  std::string sample_id;
  Relation source_relation;
  // Template name the fact was rendered with (the dataset context).
  std::string context;

  bool operator==(const NaturalFact&) const = default;
};

// Renders one fact. Needs two or more entities and a label other than NO_COMB.
NaturalFact integrate(const std::vector<EntityAttributes>& entities, RelationLabel label,
                      const FactTemplate& context);

/// One fact per non-NO_COMB relation, in corpus sample order and then span
/// set order. Samples absent from `extractions` contribute nothing.
std::vector<NaturalFact> transform_corpus(const Predictions& extractions, const Corpus& corpus,
                                          const FactTemplate& context);

// Structured serialization of the same fact, e.g. [{"class": "POS", "spans": [0, 1]}].
std::string structured_form(const NaturalFact& fact);

nlohmann::ordered_json fact_to_json(const NaturalFact& fact);
NaturalFact fact_from_json(const nlohmann::ordered_json& j);

}  // namespace sfusion
