#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfusion/corpus.hpp"

namespace sfusion {

enum class ParseErrorKind {
  NoList,          // no bracketed list of relation objects in the text
  UnknownLabel,    // "class" missing or not one of the four labels
  BadSpans,        // "spans" missing, not a list, or not integers
  TooFewSpans,     // fewer than two distinct participants
  UnresolvedSpan,  // span id not declared by the sample
};

const char* to_string(ParseErrorKind kind);

struct ParseError : public DataError {
  ParseErrorKind kind;
  ParseError(ParseErrorKind k, const std::string& message)
      : DataError(std::string(to_string(k)) + ": " + message), kind(k) {}
};

struct RawExtraction {
  std::string source_text;
  std::vector<Relation> relations;
  // One entry per tolerance applied while reading source_text.
  std::vector<std::string> warnings;
};

namespace warning {
inline constexpr std::string_view kSurroundingProse = "surrounding prose stripped";
inline constexpr std::string_view kSingleQuotes = "single quotes normalized";
inline constexpr std::string_view kBooleanCasing = "boolean casing normalized";
inline constexpr std::string_view kLaterLists = "later bracketed lists ignored";
inline constexpr std::string_view kUnknownKeys = "unknown relation keys ignored";
}  // namespace warning

/// Extracts the first bracketed list of relation objects from model output
/// and validates it against the sample's declared spans.
///
/// Accepted deviations from strict JSON: Python-style True/False/None,
/// single-quoted strings, trailing commas, and any text before or after the
/// list. Each deviation is recorded in RawExtraction::warnings. Duplicate
/// relations are preserved.
RawExtraction parse_relations(std::string_view text, const Sample& sample);

// Same, without span resolution. Used for gold strings and tests.
RawExtraction parse_relations_unchecked(std::string_view text);

/// Canonical form: `[{"class": "POS", "spans": [0, 2]}, ...]`, with
/// `"is_context_needed": true|false` appended when present.
std::string serialize_relations(const std::vector<Relation>& relations);

}  // namespace sfusion
