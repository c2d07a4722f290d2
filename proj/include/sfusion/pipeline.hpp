#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfusion/corpus.hpp"
#include "sfusion/editing.hpp"
#include "sfusion/llm_client.hpp"
#include "sfusion/prompting.hpp"
#include "sfusion/skt.hpp"

namespace sfusion {

struct PipelineConfig {
  std::filesystem::path dataset;
  DatasetKind kind = DatasetKind::DCE;
  // Separate demonstration corpus. Without it `dataset` is split.
  std::optional<std::filesystem::path> train;
  double test_fraction = 0.2;

  // "mock-oracle", "mock:<script.json>", "live:<url>" or "replay".
  std::string backend = "mock-oracle";
  std::string model = "gpt-4";
  std::optional<std::filesystem::path> cache;
  std::string credential_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int max_tokens = 1024;
  int concurrency = 4;

  std::uint64_t seed = 0;
  PromptStyle style = PromptStyle::CoT;
  std::size_t demos = 8;
  KnowledgeForm knowledge_form = KnowledgeForm::Natural;
  std::string method = "Sequential Fusion";

  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> adjudication;

  // Stage inputs; default to the files a previous stage wrote under `out`.
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> facts;
  std::optional<std::filesystem::path> answers;
};

// Everything but the output directory, in a fixed key order.
nlohmann::ordered_json config_to_json(const PipelineConfig& config);

struct Workspace {
  Corpus full;
  Corpus train;
  Corpus test;
  PromptTemplate prompt;
  FactTemplate fact;
  std::string question;
};

Workspace prepare_workspace(const PipelineConfig& config);

// Builds the backend named by config.backend, wrapped in a recording cache
// when config.cache is set. Live backends check their credential here.
std::shared_ptr<Backend> make_backend(const PipelineConfig& config, const Workspace& ws);

// Answers extraction prompts with the gold relations of the sample named in
// the prompt input, and edit prompts by restating the injected facts.
MockScript oracle_script(const std::vector<const Corpus*>& corpora);

struct PredictionRecord {
  std::string sample_id;
  std::vector<Relation> relations;
  std::string response;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
  bool backend_failure = false;
};

nlohmann::ordered_json prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::ordered_json& j);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

// Outcome of a stage. backend_failures counts samples whose request failed;
// the CLI maps a nonzero count to the backend exit code.
struct StageResult {
  std::size_t processed = 0;
  std::size_t backend_failures = 0;
  std::size_t data_failures = 0;
  std::vector<std::string> messages;
};

StageResult cmd_extract(const PipelineConfig& config);
StageResult cmd_eval_re(const PipelineConfig& config);
StageResult cmd_transform(const PipelineConfig& config);
StageResult cmd_edit_qa(const PipelineConfig& config);
StageResult cmd_eval_qa(const PipelineConfig& config);
// All stages in order, plus run-config.json.
StageResult cmd_pipeline(const PipelineConfig& config);

}  // namespace sfusion
