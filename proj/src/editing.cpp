#include "sfusion/editing.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "sfusion/io_util.hpp"

namespace sfusion {

std::string default_question(DatasetKind kind) {
  if (kind == DatasetKind::DCE) {
    return "Which drug combinations are mentioned and what are the effects of each combination?";
  }
  return "Which moderating effects are mentioned and what is the effect of each moderator?";
}

std::optional<ComboAnswer> invert_fact(const NaturalFact& fact, const FactTemplate& tmpl) {
  auto inv = tmpl.invert(fact.text);
  if (!inv) return std::nullopt;
  return make_combo(inv->entities, inv->label);
}

namespace {

std::string ask(const Sample& sample, const std::string& question) {
  return sample.sentence + " " + question;
}

std::string restate(const std::vector<NaturalFact>& facts, KnowledgeForm form) {
  std::string out;
  for (const auto& f : facts) {
    if (!out.empty()) out += ' ';
    out += form == KnowledgeForm::Natural ? f.text : structured_form(f);
  }
  return out;
}

}  // namespace

std::vector<QAPair> generate_qa_pairs(const std::vector<NaturalFact>& facts, const Corpus& corpus,
                                      const FactTemplate& tmpl, const std::string& question) {
  std::map<std::string, std::vector<const NaturalFact*>> by_sample;
  for (const auto& f : facts) {
    if (!corpus.find(f.sample_id)) {
      throw DataError("fact refers to unknown sample '" + f.sample_id + "'");
    }
    by_sample[f.sample_id].push_back(&f);
  }

  std::vector<QAPair> out;
  for (const auto& sample : corpus.samples) {
    auto it = by_sample.find(sample.id);
    if (it == by_sample.end()) continue;
    QAPair pair;
    pair.sample_id = sample.id;
    pair.question = ask(sample, question);
    for (const auto* f : it->second) {
      auto combo = invert_fact(*f, tmpl);
      if (!combo) {
        throw DataError("sample '" + sample.id + "': fact does not match the " + tmpl.name +
                        " template: " + f->text);
      }
      pair.facts.push_back(*f);
      if (std::find(pair.expected.begin(), pair.expected.end(), *combo) == pair.expected.end()) {
        pair.expected.push_back(std::move(*combo));
      }
    }
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<Demonstration> build_demonstration_pool(const Corpus& train, const FactTemplate& tmpl,
                                                    const std::string& question, std::size_t k,
                                                    std::uint64_t seed) {
  Predictions gold;
  for (const auto& s : train.samples) gold[s.id] = s.gold;
  const auto facts = transform_corpus(gold, train, tmpl);

  std::vector<Demonstration> pool;
  for (const auto& sample : train.samples) {
    Demonstration d;
    for (const auto& f : facts) {
      if (f.sample_id == sample.id) d.facts.push_back(f);
    }
    if (d.facts.empty()) continue;
    d.question = ask(sample, question);
    d.answer = restate(d.facts, KnowledgeForm::Natural);
    pool.push_back(std::move(d));
  }

  std::mt19937_64 rng(seed);
  seeded_shuffle(pool, rng);
  if (pool.size() > k) pool.resize(k);
  return pool;
}

EditContext build_edit_context(const std::vector<Demonstration>& demos,
                               const std::vector<NaturalFact>& facts, const std::string& question,
                               const std::string& target_sample_id, KnowledgeForm form) {
  if (trim(question).empty()) throw UsageError("edit context needs a question");
  EditContext ctx;
  ctx.demonstrations = demos;
  ctx.new_facts = facts;
  ctx.question = question;
  ctx.target_sample_id = target_sample_id;
  ctx.l_align = 0;
  for (const auto& f : facts) {
    if (f.sample_id == target_sample_id) {
      ctx.l_align = 1;
      break;
    }
  }

  std::string& p = ctx.prompt;
  for (const auto& d : demos) {
    p += "New Fact: " + restate(d.facts, form) + "\n";
    p += "Q: " + d.question + "\n";
    p += "A: " + d.answer + "\n\n";
  }
  p += "New Fact: " + restate(facts, form) + "\n";
  p += "Q: " + question + "\n";
  p += "A:";
  return ctx;
}

std::vector<QaAnswer> run_edited_qa(Backend& backend, const std::vector<EditContext>& contexts,
                                    const GenerationOptions& options) {
  std::vector<QaAnswer> out(contexts.size());
  parallel_for_bounded(contexts.size(), options.concurrency, [&](std::size_t i) {
    out[i].sample_id = contexts[i].target_sample_id;
    try {
      LlmRequest req{options.model, contexts[i].prompt, options.temperature, options.max_tokens};
      out[i].text = complete(backend, req).text;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

nlohmann::ordered_json context_to_json(const EditContext& ctx, const QAPair& pair) {
  nlohmann::ordered_json j;
  j["sample_id"] = ctx.target_sample_id;
  j["question"] = ctx.question;
  j["l_align"] = ctx.l_align;
  j["demonstrations"] = ctx.demonstrations.size();
  j["new_facts"] = nlohmann::ordered_json::array();
  for (const auto& f : ctx.new_facts) j["new_facts"].push_back(f.text);
  j["expected"] = nlohmann::ordered_json::array();
  for (const auto& c : pair.expected) j["expected"].push_back(combo_to_json(c));
  j["prompt"] = ctx.prompt;
  return j;
}

nlohmann::ordered_json answer_to_json(const QaAnswer& a) {
  nlohmann::ordered_json j;
  j["sample_id"] = a.sample_id;
  j["answer"] = a.text;
  j["error"] = a.error ? nlohmann::ordered_json(*a.error) : nlohmann::ordered_json(nullptr);
  return j;
}

QaAnswer answer_from_json(const nlohmann::ordered_json& j) {
  QaAnswer a;
  try {
    a.sample_id = j.at("sample_id").get<std::string>();
    a.text = j.value("answer", "");
    if (j.contains("error") && j["error"].is_string()) a.error = j["error"].get<std::string>();
  } catch (const nlohmann::ordered_json::exception& e) {
    throw DataError(std::string("malformed answer record: ") + e.what());
  }
  return a;
}

}  // namespace sfusion
