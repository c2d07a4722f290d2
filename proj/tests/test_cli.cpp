#include "doctest.h"
#include "helpers.hpp"

#include <cstdlib>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("env -u SFUSION_CLI_TEST_KEY ") + SFUSION_CLI + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string common() {
  return "--dataset " + fixture("edce_test.jsonl").string() + " --train " +
         fixture("edce_train.jsonl").string();
}

}  // namespace

TEST_CASE("exit codes: success, usage, data, backend") {
  auto dir = scratch_dir("cli");
  CHECK(run("pipeline " + common() + " --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "reports" / "qa_accuracy.txt"));

  CHECK(run("pipeline " + common() + " --kind XYZ") == 1);
  CHECK(run("pipeline " + common() + " --style zero") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("pipeline") == 1);

  CHECK(run("pipeline --dataset " + (dir / "missing.jsonl").string()) == 2);
  CHECK(run("eval-re " + common() + " --predictions " + (dir / "none.jsonl").string()) == 2);

  CHECK(run("extract " + common() + " --backend live:http://127.0.0.1:1/v1/chat/completions"
            " --credential-env SFUSION_CLI_TEST_KEY --out " + (dir / "live").string()) == 3);
  CHECK(!fs::exists(dir / "live" / "predictions.jsonl"));
  CHECK(run("extract " + common() + " --backend replay --cache " + (dir / "cold.jsonl").string() +
            " --out " + (dir / "cold").string()) == 3);
  CHECK(fs::exists(dir / "cold" / "predictions.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("help lists the stages") {
  CHECK(run("--help") == 0);
  CHECK(run("pipeline --help") == 0);
}
