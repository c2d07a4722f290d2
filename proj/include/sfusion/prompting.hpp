#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sfusion/corpus.hpp"

namespace sfusion {

// The four modules of a relation-extraction prompt.
struct PromptTemplate {
  std::string instruction;
  std::vector<std::string> reasoning_steps;
  // Lead-in sentence printed above the format examples.
  std::string format_intro;
  std::vector<std::string> format_examples;
  std::string tips;

  bool operator==(const PromptTemplate&) const = default;
};

enum class PromptStyle { CoT, FewShot };

const char* to_string(PromptStyle style);
PromptStyle parse_prompt_style(std::string_view text);

namespace section {
inline constexpr std::string_view kInstruction = "### INSTRUCTION";
inline constexpr std::string_view kReason = "### REASON";
inline constexpr std::string_view kFormat = "### FORMAT";
inline constexpr std::string_view kTips = "### TIPS";
inline constexpr std::string_view kInput = "### INPUT";
}  // namespace section

// Stock prompts for each dataset, verbatim.
PromptTemplate default_template(DatasetKind kind);

// Replaces sections of `base` with files found in `dir`: instruction.txt,
// reason.txt (one step per line), format.txt (intro line, then one example
// per line) and tips.txt. Missing files leave the section unchanged.
PromptTemplate load_template_overrides(PromptTemplate base, const std::filesystem::path& dir);

// A solved example: the sample and its serialized gold answer.
using PromptDemonstration = std::pair<Sample, std::string>;

// The sample as it appears under ### INPUT: sentence, spans, paragraph.
std::string render_sample_input(const Sample& sample);

/// Renders INSTRUCTION, REASON, FORMAT, TIPS and INPUT sections in that
/// order. FewShot drops REASON and lists the demonstrations at the end of
/// the FORMAT section; it throws UsageError when given no demonstrations.
std::string build_re_prompt(const PromptTemplate& tmpl, const Sample& sample, PromptStyle style,
                            const std::vector<PromptDemonstration>& demonstrations = {});

}  // namespace sfusion
