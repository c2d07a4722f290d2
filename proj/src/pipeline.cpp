#include "sfusion/pipeline.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "sfusion/error_report.hpp"
#include "sfusion/io_util.hpp"
#include "sfusion/qa_eval.hpp"
#include "sfusion/re_eval.hpp"
#include "sfusion/re_parser.hpp"

namespace sfusion {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Demonstration sampling gets its own stream so that changing the split
// fraction does not also reshuffle the demonstrations.
constexpr std::uint64_t kDemoSalt = 0x9E3779B97F4A7C15ULL;

fs::path predictions_path(const PipelineConfig& c) {
  return c.predictions.value_or(c.out / "predictions.jsonl");
}
fs::path facts_path(const PipelineConfig& c) { return c.facts.value_or(c.out / "facts.jsonl"); }
fs::path answers_path(const PipelineConfig& c) {
  return c.answers.value_or(c.out / "answers.jsonl");
}

void write_jsonl(const fs::path& path, const std::vector<ojson>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  write_file_atomic(path, text);
}

std::vector<ojson> read_jsonl(const fs::path& path) {
  std::vector<ojson> rows;
  std::size_t n = 0;
  const auto text = read_file(path);
  for (auto line : split_lines(text)) {
    auto j = ojson::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError(path.string() + ": line " + std::to_string(n + 1) + " is not valid JSON");
    }
    rows.push_back(std::move(j));
    ++n;
  }
  return rows;
}

std::vector<NaturalFact> load_facts(const fs::path& path) {
  std::vector<NaturalFact> facts;
  for (const auto& j : read_jsonl(path)) facts.push_back(fact_from_json(j));
  return facts;
}

Predictions to_predictions(const std::vector<PredictionRecord>& records) {
  Predictions p;
  for (const auto& r : records) p[r.sample_id] = r.relations;
  return p;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

ojson config_to_json(const PipelineConfig& c) {
  auto opt = [](const std::optional<fs::path>& p) {
    return p ? ojson(p->string()) : ojson(nullptr);
  };
  ojson j;
  j["dataset"] = c.dataset.string();
  j["kind"] = to_string(c.kind);
  j["train"] = opt(c.train);
  j["test_fraction"] = c.test_fraction;
  j["backend"] = c.backend;
  j["model"] = c.model;
  j["cache"] = opt(c.cache);
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["seed"] = c.seed;
  j["style"] = to_string(c.style);
  j["demos"] = c.demos;
  j["knowledge_form"] = c.knowledge_form == KnowledgeForm::Natural ? "natural" : "structured";
  j["method"] = c.method;
  j["templates"] = opt(c.templates);
  j["adjudication"] = opt(c.adjudication);
  return j;
}

Workspace prepare_workspace(const PipelineConfig& c) {
  Workspace ws;
  ws.full = load_corpus(c.dataset, c.kind);
  if (c.train) {
    ws.train = load_corpus(*c.train, c.kind);
    ws.test = ws.full;
  } else {
    std::tie(ws.train, ws.test) = split_corpus(ws.full, c.test_fraction, c.seed);
  }
  ws.prompt = default_template(c.kind);
  ws.fact = FactTemplate::for_kind(c.kind);
  ws.question = default_question(c.kind);
  if (c.templates) {
    ws.prompt = load_template_overrides(ws.prompt, *c.templates);
    if (fs::exists(*c.templates / "fact.txt")) {
      ws.fact = FactTemplate::from_file(*c.templates / "fact.txt", c.kind);
    }
    if (fs::exists(*c.templates / "question.txt")) {
      ws.question = trim(read_file(*c.templates / "question.txt"));
    }
  }
  return ws;
}

MockScript oracle_script(const std::vector<const Corpus*>& corpora) {
  std::map<std::pair<std::string, std::string>, std::string> gold;
  for (const auto* corpus : corpora) {
    for (const auto& s : corpus->samples) {
      gold.emplace(std::pair{s.sentence, s.paragraph}, serialize_relations(s.gold));
    }
  }
  MockScript script;
  script.echo_facts = true;
  script.responder = [gold = std::move(gold)](const LlmRequest& req) -> std::optional<std::string> {
    const std::string marker = std::string(section::kInput) + "\n";
    auto at = req.prompt.rfind(marker);
    if (at == std::string::npos) return std::nullopt;
    auto start = at + marker.size();
    auto line = req.prompt.substr(start, req.prompt.find('\n', start) - start);
    auto input = ojson::parse(line, nullptr, false);
    if (input.is_discarded() || !input.is_object()) return std::nullopt;
    auto it = gold.find({input.value("sentence", ""), input.value("paragraph", "")});
    if (it == gold.end()) return std::nullopt;
    return it->second;
  };
  return script;
}

std::shared_ptr<Backend> make_backend(const PipelineConfig& c, const Workspace& ws) {
  std::shared_ptr<Backend> inner;
  const auto& spec = c.backend;
  if (spec == "mock-oracle") {
    inner = std::make_shared<MockBackend>(oracle_script({&ws.full, &ws.train}));
  } else if (spec.rfind("mock:", 0) == 0) {
    inner = std::make_shared<MockBackend>(MockScript::from_file(spec.substr(5)));
  } else if (spec.rfind("live:", 0) == 0) {
    LiveConfig lc;
    lc.endpoint = spec.substr(5);
    lc.credential_env = c.credential_env;
    lc.max_in_flight = std::max(1, c.concurrency);
    inner = std::make_shared<LiveBackend>(lc);
  } else if (spec == "replay") {
    if (!c.cache) throw UsageError("the replay backend needs --cache");
  } else {
    throw UsageError("unknown backend '" + spec +
                     "' (expected mock-oracle, mock:<file>, live:<url> or replay)");
  }
  if (!c.cache) return inner;
  return std::make_shared<ReplayBackend>(std::make_shared<ResponseCache>(*c.cache), inner);
}

ojson prediction_to_json(const PredictionRecord& r) {
  ojson j;
  j["sample_id"] = r.sample_id;
  j["relations"] = ojson::array();
  for (const auto& rel : r.relations) j["relations"].push_back(relation_to_json(rel));
  j["response"] = r.response;
  j["warnings"] = r.warnings;
  j["error"] = r.error ? ojson(*r.error) : ojson(nullptr);
  return j;
}

PredictionRecord prediction_from_json(const ojson& j) {
  PredictionRecord r;
  if (!j.is_object() || !j.contains("sample_id") || !j["sample_id"].is_string()) {
    throw DataError("prediction record without a string sample_id");
  }
  r.sample_id = j["sample_id"].get<std::string>();
  const std::string where = "prediction '" + r.sample_id + "'";
  if (auto it = j.find("relations"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError(where + ": relations must be a list");
    for (const auto& rel : *it) r.relations.push_back(relation_from_json(rel, where));
  }
  if (auto it = j.find("response"); it != j.end() && it->is_string()) r.response = *it;
  if (auto it = j.find("warnings"); it != j.end() && it->is_array()) {
    for (const auto& w : *it) {
      if (w.is_string()) r.warnings.push_back(w.get<std::string>());
    }
  }
  if (auto it = j.find("error"); it != j.end() && it->is_string()) r.error = it->get<std::string>();
  return r;
}

std::vector<PredictionRecord> load_predictions(const fs::path& path) {
  std::vector<PredictionRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(prediction_from_json(j));
  return out;
}

StageResult cmd_extract(const PipelineConfig& c) {
  auto ws = prepare_workspace(c);
  auto backend = make_backend(c, ws);

  std::vector<PromptDemonstration> demos;
  if (c.style == PromptStyle::FewShot) {
    std::vector<const Sample*> pool;
    for (const auto& s : ws.train.samples) pool.push_back(&s);
    std::mt19937_64 rng(c.seed ^ kDemoSalt);
    seeded_shuffle(pool, rng);
    for (std::size_t i = 0; i < pool.size() && i < c.demos; ++i) {
      demos.emplace_back(*pool[i], serialize_relations(pool[i]->gold));
    }
  }

  const auto& samples = ws.test.samples;
  std::vector<PredictionRecord> records(samples.size());
  parallel_for_bounded(samples.size(), c.concurrency, [&](std::size_t i) {
    auto& r = records[i];
    r.sample_id = samples[i].id;
    try {
      auto prompt = build_re_prompt(ws.prompt, samples[i], c.style, demos);
      r.response = complete(*backend, {c.model, prompt, c.temperature, c.max_tokens}).text;
      auto parsed = parse_relations(r.response, samples[i]);
      r.relations = std::move(parsed.relations);
      r.warnings = std::move(parsed.warnings);
    } catch (const BackendError& e) {
      r.error = e.what();
      r.backend_failure = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  StageResult result;
  std::vector<ojson> rows;
  for (const auto& r : records) {
    rows.push_back(prediction_to_json(r));
    ++result.processed;
    if (r.error) {
      (r.backend_failure ? result.backend_failures : result.data_failures)++;
      result.messages.push_back("sample " + r.sample_id + ": " + *r.error);
    }
  }
  write_jsonl(predictions_path(c), rows);
  return result;
}

StageResult cmd_eval_re(const PipelineConfig& c) {
  auto ws = prepare_workspace(c);
  auto records = load_predictions(predictions_path(c));
  auto table = compute_f1_table(ws.test, to_predictions(records));

  StageResult result;
  result.processed = ws.test.samples.size();
  for (const auto& r : records) {
    if (r.error) ++result.data_failures;
  }
  for (const auto& id : table.positive_exact.missing_predictions) {
    result.messages.push_back("no prediction for sample " + id);
  }
  fs::create_directories(c.out / "reports");
  write_file_atomic(c.out / "reports" / "re_f1.json", to_json(table).dump(2) + "\n");
  write_file_atomic(c.out / "reports" / "re_f1.txt", format_table(table));
  return result;
}

StageResult cmd_transform(const PipelineConfig& c) {
  auto ws = prepare_workspace(c);
  auto records = load_predictions(predictions_path(c));
  auto facts = transform_corpus(to_predictions(records), ws.test, ws.fact);
  std::vector<ojson> rows;
  for (const auto& f : facts) rows.push_back(fact_to_json(f));
  write_jsonl(facts_path(c), rows);
  StageResult result;
  result.processed = facts.size();
  return result;
}

StageResult cmd_edit_qa(const PipelineConfig& c) {
  auto ws = prepare_workspace(c);
  auto facts = load_facts(facts_path(c));
  auto pairs = generate_qa_pairs(facts, ws.test, ws.fact, ws.question);
  auto demos = build_demonstration_pool(ws.train, ws.fact, ws.question, c.demos, c.seed ^ kDemoSalt);

  std::vector<EditContext> contexts;
  std::vector<ojson> context_rows;
  for (const auto& p : pairs) {
    contexts.push_back(build_edit_context(demos, p.facts, p.question, p.sample_id, c.knowledge_form));
    context_rows.push_back(context_to_json(contexts.back(), p));
  }
  write_jsonl(c.out / "contexts.jsonl", context_rows);

  auto backend = make_backend(c, ws);
  GenerationOptions opts{c.model, c.temperature, c.max_tokens, c.concurrency};
  auto answers = run_edited_qa(*backend, contexts, opts);

  StageResult result;
  std::vector<ojson> rows;
  for (const auto& a : answers) {
    rows.push_back(answer_to_json(a));
    ++result.processed;
    if (a.error) {
      ++result.backend_failures;
      result.messages.push_back("sample " + a.sample_id + ": " + *a.error);
    }
  }
  write_jsonl(answers_path(c), rows);
  return result;
}

StageResult cmd_eval_qa(const PipelineConfig& c) {
  auto ws = prepare_workspace(c);
  auto facts = load_facts(facts_path(c));
  auto pairs = generate_qa_pairs(facts, ws.test, ws.fact, ws.question);
  std::map<std::string, QaAnswer> answers;
  for (const auto& j : read_jsonl(answers_path(c))) {
    auto a = answer_from_json(j);
    answers[a.sample_id] = std::move(a);
  }

  StageResult result;
  std::vector<QaCase> cases;
  for (const auto& p : pairs) {
    QaCase qc{p.sample_id, p.expected, {}};
    auto it = answers.find(p.sample_id);
    if (it == answers.end()) {
      result.messages.push_back("no answer for sample " + p.sample_id);
    } else if (!it->second.error) {
      qc.generated = normalize_answer(it->second.text, *ws.test.find(p.sample_id));
    }
    cases.push_back(std::move(qc));
  }
  result.processed = cases.size();

  fs::create_directories(c.out / "reports");
  if (cases.empty()) {
    result.messages.push_back("no question-answer pairs; nothing to score");
    write_file_atomic(c.out / "reports" / "qa_accuracy.json", to_json(AccuracyReport{}).dump(2) + "\n");
    write_file_atomic(c.out / "reports" / "qa_accuracy.txt", "no samples scored\n");
    return result;
  }

  auto report = corpus_accuracy(score_cases(cases));
  if (c.adjudication) report = apply_adjudication(report, load_adjudications(*c.adjudication));
  write_file_atomic(c.out / "reports" / "qa_accuracy.json", to_json(report).dump(2) + "\n");
  write_file_atomic(c.out / "reports" / "qa_accuracy.txt", format_report(report));

  std::vector<ErrorSet> sets;
  for (const auto& qc : cases) sets.push_back(classify(qc.standards, qc.generated));
  std::vector<ErrorTableRow> rows{{c.model, to_string(c.kind), c.method, distribution(sets, sets.size())}};
  ojson ej = to_json(rows);
  write_file_atomic(c.out / "reports" / "errors.json", ej.dump(2) + "\n");
  write_file_atomic(c.out / "reports" / "errors.txt", format_error_table(rows));
  result.messages.push_back("final accuracy " + pct(report.final_accuracy * 100.0) + "%");
  return result;
}

StageResult cmd_pipeline(const PipelineConfig& c) {
  fs::create_directories(c.out);
  write_file_atomic(c.out / "run-config.json", config_to_json(c).dump(2) + "\n");
  StageResult total;
  for (auto stage : {cmd_extract, cmd_eval_re, cmd_transform, cmd_edit_qa, cmd_eval_qa}) {
    auto r = stage(c);
    total.backend_failures += r.backend_failures;
    total.data_failures += r.data_failures;
    total.processed = r.processed;
    total.messages.insert(total.messages.end(), r.messages.begin(), r.messages.end());
  }
  return total;
}

}  // namespace sfusion
