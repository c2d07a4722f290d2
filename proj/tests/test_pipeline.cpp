#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "sfusion/pipeline.hpp"

#include <fstream>
#include <map>

using namespace sfusion;
namespace fs = std::filesystem;

namespace {

PipelineConfig base_config(const fs::path& out) {
  PipelineConfig c;
  c.dataset = fixture("edce_test.jsonl");
  c.train = fixture("edce_train.jsonl");
  c.kind = DatasetKind::DCE;
  c.backend = "mock-oracle";
  c.seed = 13;
  c.out = out;
  return c;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("oracle mock pipeline scores perfectly on the fixture set") {
  auto dir = scratch_dir("e2e");
  auto c = base_config(dir / "out");
  auto r = cmd_pipeline(c);
  CHECK(r.backend_failures == 0);
  CHECK(r.data_failures == 0);

  auto f1 = read_json(c.out / "reports" / "re_f1.json");
  for (auto enc : {"positive_combination", "any_combination"}) {
    for (auto mode : {"exact", "partial"}) CHECK(f1[enc][mode]["f1"].get<double>() == doctest::Approx(100.0));
  }
  auto qa = read_json(c.out / "reports" / "qa_accuracy.json");
  CHECK(qa["final_accuracy"].get<double>() == doctest::Approx(1.0));
  CHECK(qa["n"] == 4);
  auto errs = read_json(c.out / "reports" / "errors.json");
  for (auto col : {"no_answers", "contradiction", "error", "omissions"}) CHECK(errs[0][col] == 0.0);

  CHECK(fs::exists(c.out / "run-config.json"));
  CHECK(read_json(c.out / "run-config.json").dump().find("out") == std::string::npos);
  auto contexts = read_file(c.out / "contexts.jsonl");
  CHECK(contexts.find("\"l_align\":1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("split mode and few-shot extraction also work") {
  auto dir = scratch_dir("split");
  auto c = base_config(dir / "out");
  c.train.reset();
  c.dataset = fixture("edce_train.jsonl");
  c.test_fraction = 0.5;
  c.style = PromptStyle::FewShot;
  c.demos = 2;
  auto r = cmd_pipeline(c);
  CHECK(r.backend_failures == 0);
  auto f1 = read_json(c.out / "reports" / "re_f1.json");
  CHECK(f1["any_combination"]["exact"]["f1"].get<double>() == doctest::Approx(100.0));
  CHECK(read_file(c.out / "predictions.jsonl").find("\"error\":null") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("runs with the same seed and warm cache are byte-identical") {
  auto dir = scratch_dir("det");
  auto a = base_config(dir / "a");
  a.cache = dir / "cache.jsonl";
  auto b = a;
  b.out = dir / "b";
  cmd_pipeline(a);
  auto cached = read_file(*a.cache);
  cmd_pipeline(b);
  CHECK(read_file(*a.cache) == cached);  // warm: nothing new recorded
  CHECK(snapshot(a.out) == snapshot(b.out));

  auto replay = a;
  replay.backend = "replay";
  replay.out = dir / "c";
  auto r = cmd_pipeline(replay);
  CHECK(r.backend_failures == 0);
  CHECK(snapshot(replay.out).at("reports/qa_accuracy.json") == snapshot(a.out).at("reports/qa_accuracy.json"));
  fs::remove_all(dir);
}

TEST_CASE("replay with a cold cache fails closed per sample") {
  auto dir = scratch_dir("cold");
  auto c = base_config(dir / "out");
  c.backend = "replay";
  c.cache = dir / "empty.jsonl";
  auto r = cmd_extract(c);
  CHECK(r.backend_failures == 5);
  auto preds = load_predictions(c.out / "predictions.jsonl");
  REQUIRE(preds.size() == 5);
  CHECK(preds[0].error->find("cache miss") != std::string::npos);

  c.cache.reset();
  CHECK_THROWS_AS(cmd_extract(c), UsageError);
  c.backend = "carrier-pigeon";
  CHECK_THROWS_AS(cmd_extract(c), UsageError);
  fs::remove_all(dir);
}

TEST_CASE("empty predictions give zero recall and warnings") {
  auto dir = scratch_dir("empty");
  auto c = base_config(dir / "out");
  fs::create_directories(c.out);
  std::ofstream(c.out / "predictions.jsonl").close();
  auto r = cmd_eval_re(c);
  CHECK(r.messages.size() == 5);
  auto f1 = read_json(c.out / "reports" / "re_f1.json");
  CHECK(f1["any_combination"]["partial"]["f1"] == 0.0);
  CHECK(f1["any_combination"]["partial"]["recall"] == 0.0);

  cmd_transform(c);
  CHECK(read_file(c.out / "facts.jsonl").empty());
  cmd_edit_qa(c);
  auto qa = cmd_eval_qa(c);
  CHECK(qa.processed == 0);
  fs::remove_all(dir);
}

TEST_CASE("scripted mock answers are parsed and scored") {
  auto dir = scratch_dir("script");
  auto c = base_config(dir / "out");
  std::ofstream(dir / "script.json") << R"({
    "rules": [
      {"contains": "New Fact: trastuzumab", "response": "I cannot determine this."},
      {"contains": "Trastuzumab, pertuzumab", "response": "Reasoning... [{'class': 'POS', 'spans': [0, 4]}]"}
    ],
    "default": "[]"
  })";
  c.backend = "mock:" + (dir / "script.json").string();
  cmd_pipeline(c);
  auto preds = load_predictions(c.out / "predictions.jsonl");
  REQUIRE(preds[0].sample_id == "257");
  CHECK(preds[0].relations.size() == 1);
  CHECK(!preds[0].warnings.empty());
  auto f1 = read_json(c.out / "reports" / "re_f1.json");
  CHECK(f1["any_combination"]["exact"]["recall"].get<double>() == doctest::Approx(100.0 / 7));
  auto qa = read_json(c.out / "reports" / "qa_accuracy.json");
  CHECK(qa["n"] == 1);
  CHECK(qa["final_accuracy"] == 0.0);
  auto errs = read_json(c.out / "reports" / "errors.json");
  CHECK(errs[0]["no_answers"] == 100.0);
  fs::remove_all(dir);
}

TEST_CASE("adjudication file feeds the accuracy report") {
  auto dir = scratch_dir("adjp");
  auto c = base_config(dir / "out");
  cmd_pipeline(c);
  std::ofstream(dir / "adj.jsonl") << R"({"sample_id":"301","D":0.0,"note":"disagree"})" << "\n";
  c.adjudication = dir / "adj.jsonl";
  cmd_eval_qa(c);
  auto qa = read_json(c.out / "reports" / "qa_accuracy.json");
  CHECK(qa["final_accuracy"].get<double>() == doctest::Approx(0.75));
  fs::remove_all(dir);
}
