#include <cstdio>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "sfusion/pipeline.hpp"
#include "sfusion/re_parser.hpp"

using namespace sfusion;

namespace {

int report(const StageResult& r) {
  for (const auto& m : r.messages) std::cerr << m << "\n";
  std::cerr << r.processed << " processed, " << r.data_failures << " data errors, "
            << r.backend_failures << " backend errors\n";
  return r.backend_failures > 0 ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation extraction, fact transformation and in-context editing QA"};
  app.require_subcommand(1);

  PipelineConfig cfg;
  std::string kind = "DCE", style = "cot", form = "natural";
  std::optional<std::string> train, cache, templates, adjudication, predictions, facts, answers;

  std::map<std::string, std::function<StageResult(const PipelineConfig&)>> commands = {
      {"extract", cmd_extract},     {"eval-re", cmd_eval_re}, {"transform", cmd_transform},
      {"edit-qa", cmd_edit_qa},     {"eval-qa", cmd_eval_qa}, {"pipeline", cmd_pipeline},
  };
  std::map<std::string, std::string> help = {
      {"extract", "prompt the model for relations and parse them"},
      {"eval-re", "score predictions against gold relations"},
      {"transform", "turn predicted relations into natural-language facts"},
      {"edit-qa", "build edit contexts and ask the model"},
      {"eval-qa", "score answers and count error types"},
      {"pipeline", "run every stage in order"},
  };

  for (auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help[name]);
    sub->add_option("--dataset", cfg.dataset, "JSON or JSON-lines corpus")->required();
    sub->add_option("--kind", kind, "DCE or MEE")->capture_default_str();
    sub->add_option("--train", train, "demonstration corpus; otherwise the dataset is split");
    sub->add_option("--test-fraction", cfg.test_fraction)->capture_default_str();
    sub->add_option("--backend", cfg.backend, "mock-oracle, mock:<file>, live:<url> or replay")
        ->capture_default_str();
    sub->add_option("--model", cfg.model)->capture_default_str();
    sub->add_option("--cache", cache, "response cache file (JSON lines)");
    sub->add_option("--credential-env", cfg.credential_env)->capture_default_str();
    sub->add_option("--temperature", cfg.temperature)->capture_default_str();
    sub->add_option("--max-tokens", cfg.max_tokens)->capture_default_str();
    sub->add_option("--concurrency", cfg.concurrency)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed)->capture_default_str();
    sub->add_option("--style", style, "cot or fewshot")->capture_default_str();
    sub->add_option("--demos", cfg.demos)->capture_default_str();
    sub->add_option("--knowledge-form", form, "natural or structured")->capture_default_str();
    sub->add_option("--method", cfg.method)->capture_default_str();
    sub->add_option("--out", cfg.out)->capture_default_str();
    sub->add_option("--templates", templates, "directory with prompt and fact template overrides");
    sub->add_option("--adjudication", adjudication, "manual D overrides (JSON lines)");
    sub->add_option("--predictions", predictions);
    sub->add_option("--facts", facts);
    sub->add_option("--answers", answers);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cfg.kind = parse_dataset_kind(kind);
    cfg.style = parse_prompt_style(style);
    if (form == "natural") {
      cfg.knowledge_form = KnowledgeForm::Natural;
    } else if (form == "structured") {
      cfg.knowledge_form = KnowledgeForm::Structured;
    } else {
      throw UsageError("unknown knowledge form '" + form + "'");
    }
    auto path = [](const std::optional<std::string>& s) -> std::optional<std::filesystem::path> {
      if (!s) return std::nullopt;
      return std::filesystem::path(*s);
    };
    cfg.train = path(train);
    cfg.cache = path(cache);
    cfg.templates = path(templates);
    cfg.adjudication = path(adjudication);
    cfg.predictions = path(predictions);
    cfg.facts = path(facts);
    cfg.answers = path(answers);

    auto* sub = app.get_subcommands().front();
    return report(commands.at(sub->get_name())(cfg));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
