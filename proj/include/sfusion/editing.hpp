#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfusion/corpus.hpp"
#include "sfusion/llm_client.hpp"
#include "sfusion/qa_eval.hpp"
#include "sfusion/skt.hpp"

namespace sfusion {

// Question asked about every sample, after the sample sentence.
std::string default_question(DatasetKind kind);

struct QAPair {
  std::string question;
  std::vector<ComboAnswer> expected;
  std::vector<NaturalFact> facts;
  std::string sample_id;
};

// Combination a fact states, read back through its template.
std::optional<ComboAnswer> invert_fact(const NaturalFact& fact, const FactTemplate& tmpl);

/// One pair per sample (corpus order) that has at least one fact. The
/// expected answer is the inversion of those facts. Throws DataError for a
/// fact whose sample is not in the corpus.
std::vector<QAPair> generate_qa_pairs(const std::vector<NaturalFact>& facts, const Corpus& corpus,
                                      const FactTemplate& tmpl, const std::string& question);

struct Demonstration {
  std::vector<NaturalFact> facts;
  std::string question;
  std::string answer;
};

/// Demonstrations from the gold relations of `train`: k samples with at
/// least one fact, chosen by a seeded shuffle. The answer restates the facts.
std::vector<Demonstration> build_demonstration_pool(const Corpus& train, const FactTemplate& tmpl,
                                                    const std::string& question, std::size_t k,
                                                    std::uint64_t seed);

// Which serialization of the knowledge the prompt carries.
enum class KnowledgeForm { Natural, Structured };

struct EditContext {
  std::vector<Demonstration> demonstrations;
  std::vector<NaturalFact> new_facts;
  std::string question;
  std::string target_sample_id;
  // 1 when new_facts cover the question's target sample.
  int l_align = 0;
  std::string prompt;
};

/// Renders each demonstration as "New Fact: ... / Q: ... / A: ..." followed
/// by the new facts, the question and an open "A:". Throws UsageError on an
/// empty question.
EditContext build_edit_context(const std::vector<Demonstration>& demos,
                               const std::vector<NaturalFact>& facts, const std::string& question,
                               const std::string& target_sample_id,
                               KnowledgeForm form = KnowledgeForm::Natural);

struct GenerationOptions {
  std::string model = "mock";
  double temperature = 0.0;
  int max_tokens = 1024;
  int concurrency = 4;
};

struct QaAnswer {
  std::string sample_id;
  std::string text;
  std::optional<std::string> error;
};

// One answer per context, in order. Backend failures are recorded on the
// answer and do not stop the batch.
std::vector<QaAnswer> run_edited_qa(Backend& backend, const std::vector<EditContext>& contexts,
                                    const GenerationOptions& options);

nlohmann::ordered_json context_to_json(const EditContext& ctx, const QAPair& pair);
nlohmann::ordered_json answer_to_json(const QaAnswer& answer);
QaAnswer answer_from_json(const nlohmann::ordered_json& j);

}  // namespace sfusion
