#include "doctest.h"
#include "helpers.hpp"
#include "sfusion/prompting.hpp"

#include <fstream>

using namespace sfusion;

TEST_CASE("default templates carry the published wording") {
  auto dce = default_template(DatasetKind::DCE);
  auto mee = default_template(DatasetKind::MEE);
  CHECK(dce.instruction.starts_with("Task Definition is as follows:"));
  CHECK(mee.tips.find("may not always correspond exactly") != std::string::npos);
  CHECK(dce.tips != mee.tips);
  CHECK(dce.format_examples.size() == 3);
  CHECK(dce.format_examples[0] ==
        R"([{"class": "POS", "spans": [0, 1, 2], "is_context_needed": True}])");
  CHECK(mee.format_examples[0] == "[]");
  CHECK(dce.reasoning_steps.size() == 2);
  CHECK(dce.reasoning_steps[1].ends_with("If the effect is unclear, label it as COMB."));
  CHECK(mee.reasoning_steps[1].ends_with("If the effect is not yet clear, you should label it as COMB."));
}

TEST_CASE("CoT prompt has all sections in order and the sample verbatim") {
  auto s = reference_dce();
  auto p = build_re_prompt(default_template(DatasetKind::DCE), s, PromptStyle::CoT);
  auto at = [&](std::string_view h) { return p.find(h); };
  REQUIRE(at(section::kInstruction) != std::string::npos);
  CHECK(at(section::kInstruction) < at(section::kReason));
  CHECK(at(section::kReason) < at(section::kFormat));
  CHECK(at(section::kFormat) < at(section::kTips));
  CHECK(at(section::kTips) < at(section::kInput));
  CHECK(p.find(s.sentence) != std::string::npos);
  CHECK(p.find("1. First, determine") != std::string::npos);
  CHECK(p.find("2. If the sentence") != std::string::npos);
}

TEST_CASE("few-shot prompt swaps reasoning for worked examples") {
  auto s = reference_dce();
  std::vector<PromptDemonstration> demos{{s, R"([{"class": "POS", "spans": [0, 2]}])"}};
  auto p = build_re_prompt(default_template(DatasetKind::DCE), s, PromptStyle::FewShot, demos);
  CHECK(p.find(section::kReason) == std::string::npos);
  CHECK(p.find("Example 1:\nInput: {") != std::string::npos);
  CHECK(p.find("Output: [{\"class\": \"POS\", \"spans\": [0, 2]}]") != std::string::npos);
  CHECK_THROWS_AS(build_re_prompt(default_template(DatasetKind::DCE), s, PromptStyle::FewShot),
                  UsageError);
}

TEST_CASE("prompt construction is deterministic") {
  auto s = reference_dce();
  auto t = default_template(DatasetKind::DCE);
  CHECK(build_re_prompt(t, s, PromptStyle::CoT) == build_re_prompt(t, s, PromptStyle::CoT));
}

TEST_CASE("template overrides replace only the files present") {
  auto dir = scratch_dir("tmpl");
  std::ofstream(dir / "tips.txt") << "Be brief.\n";
  std::ofstream(dir / "reason.txt") << "Step one.\nStep two.\nStep three.\n";
  auto t = load_template_overrides(default_template(DatasetKind::DCE), dir);
  CHECK(t.tips == "Be brief.");
  CHECK(t.reasoning_steps.size() == 3);
  CHECK(t.instruction == default_template(DatasetKind::DCE).instruction);
  std::filesystem::remove_all(dir);
}

TEST_CASE("style names") {
  CHECK(parse_prompt_style("CoT") == PromptStyle::CoT);
  CHECK(parse_prompt_style("fewshot") == PromptStyle::FewShot);
  CHECK_THROWS_AS(parse_prompt_style("zero"), UsageError);
}
