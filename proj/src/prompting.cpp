#include "sfusion/prompting.hpp"

#include "sfusion/io_util.hpp"

namespace sfusion {

namespace {

constexpr const char* kInstruction =
    "Task Definition is as follows:\n"
    "INPUT: consists of a sentence, drug mentions within the sentence, and an enclosing context "
    "(e.g. paragraph or abstract).\n"
    "OUTPUT: a set of relations, each consisting of a set of participating drug spans and a "
    "relation label";

PromptTemplate dce_template() {
  PromptTemplate t;
  t.instruction = kInstruction;
  t.reasoning_steps = {
      "First, determine the content of the key 'sentence.' If the sentence does not state that "
      "the given drugs are used in combination, even if a combination is indicated elsewhere in "
      "the wider context, you should output an empty list ([]).",
      "If the sentence indicates that the drugs are used in combination, you should combine it "
      "with the content of the key 'paragraph' to determine the effect of the combination. If the "
      "effect is positive, you should label it as POS. If the effect is negative, label it as NEG. "
      "If the effect is unclear, label it as COMB.",
  };
  t.format_intro =
      "Here are some output examples,you should output the results in the following format";
  t.format_examples = {
      R"([{"class": "POS", "spans": [0, 1, 2], "is_context_needed": True}])",
      R"([{"class": "NEG", "spans": [0, 1], "is_context_needed": false}, {"class": "NEG", "spans": [0, 2], "is_context_needed": False}])",
      R"([{"class": "COMB", "spans": [1, 2, 3], "is_context_needed": true}, {"class": "COMB", "spans": [4, 5], "is_context_needed": True}])",
  };
  t.tips =
      R"(Spans are IDs for the combinations of drugs used, and sometimes there may be multiple )"
      R"(combinations, such as [{"class": "POS", "spans": [0, 2], "is_context_needed": true}, )"
      R"({"class": "COMB", "spans": [0, 1], "is_context_needed": true}]". You need to separately )"
      R"(assess their effects. The `is_context_needed` indicates whether you need to rely on the )"
      R"(content of the key 'paragraph' to determine the effects of the drug combinations.)";
  return t;
}

PromptTemplate mee_template() {
  PromptTemplate t;
  t.instruction = kInstruction;
  t.reasoning_steps = {
      "First, you need to determine the content of the key 'sentence.' If the sentence does not "
      "state that the given drugs are used in combination, even if a combination is indicated "
      "somewhere else in the wider context, you should output ([]).",
      "Then, if the sentence indicates that the drugs are used in combination, you should combine "
      "it with the content of the key 'paragraph' to determine the effect of the combination. If "
      "the effect is positive, you should label it as POS. If the effect is negative, you should "
      "label it as NEG. If the effect is not yet clear, you should label it as COMB.",
  };
  t.format_intro =
      "Here are some output examples,you should output the results in the following format:";
  t.format_examples = {
      "[]",
      R"([{"class": "POS", "spans": [0, 1]}])",
      R"([{"class": "NEG", "spans": [0, 1]}])",
  };
  t.tips =
      "The mention of variables may not always correspond exactly with the variable names that "
      "appear in the text; a comprehensive judgment based on the content of the text is required.";
  return t;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  for (auto line : split_lines(text)) out.emplace_back(line);
  return out;
}

std::string strip_final_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

const char* to_string(PromptStyle style) {
  return style == PromptStyle::CoT ? "cot" : "fewshot";
}

PromptStyle parse_prompt_style(std::string_view text) {
  auto lower = to_lower_ascii(text);
  if (lower == "cot") return PromptStyle::CoT;
  if (lower == "fewshot" || lower == "few-shot") return PromptStyle::FewShot;
  throw UsageError("unknown prompt style '" + std::string(text) + "' (expected cot or fewshot)");
}

PromptTemplate default_template(DatasetKind kind) {
  return kind == DatasetKind::DCE ? dce_template() : mee_template();
}

PromptTemplate load_template_overrides(PromptTemplate base, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (auto p = dir / "instruction.txt"; fs::exists(p)) {
    base.instruction = strip_final_newline(read_file(p));
  }
  if (auto p = dir / "reason.txt"; fs::exists(p)) base.reasoning_steps = lines_of(read_file(p));
  if (auto p = dir / "format.txt"; fs::exists(p)) {
    auto lines = lines_of(read_file(p));
    if (lines.empty()) throw DataError(p.string() + ": empty format override");
    base.format_intro = lines.front();
    base.format_examples.assign(lines.begin() + 1, lines.end());
  }
  if (auto p = dir / "tips.txt"; fs::exists(p)) base.tips = strip_final_newline(read_file(p));
  if (base.instruction.empty()) throw DataError("prompt template has an empty instruction");
  return base;
}

std::string render_sample_input(const Sample& sample) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  obj["sentence"] = sample.sentence;
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& s : sample.spans) {
    nlohmann::ordered_json js = nlohmann::ordered_json::object();
    js["span_id"] = s.span_id;
    js["text"] = s.text;
    if (s.start) js["start"] = *s.start;
    if (s.end) js["end"] = *s.end;
    if (s.token_start) js["token_start"] = *s.token_start;
    if (s.token_end) js["token_end"] = *s.token_end;
    spans.push_back(std::move(js));
  }
  obj["spans"] = std::move(spans);
  obj["paragraph"] = sample.paragraph;
  return obj.dump();
}

std::string build_re_prompt(const PromptTemplate& tmpl, const Sample& sample, PromptStyle style,
                            const std::vector<PromptDemonstration>& demonstrations) {
  if (style == PromptStyle::FewShot && demonstrations.empty()) {
    throw UsageError("few-shot prompt needs at least one demonstration");
  }
  if (style == PromptStyle::CoT && tmpl.reasoning_steps.empty()) {
    throw UsageError("chain-of-thought prompt needs reasoning steps");
  }

  std::string out;
  out.append(section::kInstruction).append("\n").append(tmpl.instruction).append("\n\n");

  if (style == PromptStyle::CoT) {
    out.append(section::kReason).append("\n");
    for (std::size_t i = 0; i < tmpl.reasoning_steps.size(); ++i) {
      out.append(std::to_string(i + 1)).append(". ").append(tmpl.reasoning_steps[i]).append("\n");
    }
    out.append("\n");
  }

  out.append(section::kFormat).append("\n").append(tmpl.format_intro).append("\n");
  for (const auto& ex : tmpl.format_examples) out.append(ex).append("\n");
  if (style == PromptStyle::FewShot) {
    for (std::size_t i = 0; i < demonstrations.size(); ++i) {
      const auto& [demo, answer] = demonstrations[i];
      out.append("\nExample ").append(std::to_string(i + 1)).append(":\n");
      out.append("Input: ").append(render_sample_input(demo)).append("\n");
      out.append("Output: ").append(answer).append("\n");
    }
  }
  out.append("\n");

  out.append(section::kTips).append("\n").append(tmpl.tips).append("\n\n");
  out.append(section::kInput).append("\n").append(render_sample_input(sample)).append("\n");
  return out;
}

}  // namespace sfusion
