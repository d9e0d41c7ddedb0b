#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "graphdec/cli.hpp"
#include "graphdec/config.hpp"
#include "graphdec/io.hpp"

using namespace graphdec;

namespace {

fs::path scratch(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("graphdec_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "graphdec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fixture() {
  const auto dir = scratch("fixture");
  write_text(dir / "FIX_A.txt", "1, 2\n2, 3\n4, 5\n5, 6\n");
  write_text(dir / "FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
  write_text(dir / "FIX_graph_labels.txt", "1\n-1\n");
  return dir;
}

}  // namespace

TEST_CASE("config defaults and precedence") {
  const auto dir = scratch("config");
  write_text(dir / "empty.ini", "");
  const auto d = load_config(dir / "empty.ini");
  CHECK(d.sparsity.alpha0 == 0.8);
  CHECK(d.decanter.epsilon == 0.1);
  CHECK(d.epochs == 100);

  write_text(dir / "fifty.ini", "[train]\nepochs = 50\n");
  CHECK(load_config(dir / "fifty.ini").epochs == 50);
  CHECK(load_config(dir / "fifty.ini", {{"epochs", "10"}}).epochs == 10);

  write_text(dir / "bare.ini", "epsilon = 0.2 # comment\nalpha0=0.6\n[probe]\nepochs = 7\n");
  const auto bare = load_config(dir / "bare.ini");
  CHECK(bare.decanter.epsilon == 0.2);
  CHECK(bare.sparsity.alpha0 == 0.6);
  CHECK(bare.probe.epochs == 7);
  CHECK(bare.epochs == 100);
}

TEST_CASE("config errors list every offender") {
  const auto dir = scratch("config_err");
  write_text(dir / "bad.ini", "epsilon = maybe\ncolour = blue\n");
  try {
    load_config(dir / "bad.ini");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epsilon") != std::string::npos);
    CHECK(msg.find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config(std::nullopt, {{"batch_size", "1"}}), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), LoadError);
}

TEST_CASE("config ini round trip") {
  TrainConfig cfg;
  cfg.learning_rate = 0.1 / 3.0;
  cfg.seed = 123456789012345ULL;
  cfg.ablation.rw = false;
  cfg.selector = Selector::data_diet;
  const auto dir = scratch("roundtrip");
  write_text(dir / "c.ini", config_to_ini(cfg));
  const auto back = load_config(dir / "c.ini");
  CHECK(config_entries(back) == config_entries(cfg));
}

TEST_CASE("train smoke run produces every artifact") {
  const auto data = fixture();
  const auto out = scratch("smoke");
  CHECK(run({"train", "--data-dir", data.string(), "--name", "FIX", "--selector", "vanilla",
             "--epochs", "1", "--dump-masks", "--out-dir", out.string()}) == 0);
  for (const char* f : {"report.json", "metrics.jsonl", "scores.csv", "masks.json", "config.ini",
                        "split.json", "embeddings_train.csv", "embeddings_test.csv"})
    CHECK(fs::exists(out / f));
  const auto report = read_json(out / "report.json");
  for (const char* k : {"accuracy", "balanced_accuracy", "f1_macro", "f1_micro", "confusion"})
    CHECK(report.at("eval").contains(k));
  CHECK(report.at("manifest").at("seed") == 0);
  CHECK(report.at("manifest").at("config").at("train.selector") == "vanilla");

  const auto metrics = read_text(out / "metrics.jsonl");
  const auto line = nlohmann::json::parse(metrics.substr(0, metrics.find('\n')));
  for (const char* k : {"epoch", "loss", "subset_size", "keep_fraction", "seconds"}) CHECK(line.contains(k));
  const auto scores = read_text(out / "scores.csv");
  CHECK(scores.rfind("epoch,sample_id,raw_score,normalized_score,in_subset,in_bin\n", 0) == 0);

  const auto eval_out = out / "eval.json";
  CHECK(run({"evaluate", "--train-embeddings", (out / "embeddings_train.csv").string(),
             "--test-embeddings", (out / "embeddings_test.csv").string(), "--out",
             eval_out.string()}) == 0);
  CHECK(read_json(eval_out).at("accuracy") == report.at("eval").at("accuracy"));
}

TEST_CASE("exit codes") {
  CHECK(run({"train", "--no-such-flag"}) == 3);
  CHECK(run({"train", "--builtin", "synthetic", "--set", "epsilon=maybe", "--out-dir",
             scratch("bad").string()}) == 3);
  CHECK(run({"train", "--data-dir", "/nonexistent/dir", "--name", "X"}) == 2);
  CHECK(run({"train", "--builtin", "synthetic", "--minority-count", "500", "--majority-count", "5",
             "--epochs", "1", "--out-dir", scratch("infeasible").string()}) == 1);
  CHECK(run({}) == 3);
}

TEST_CASE("generate, split, trace and verify-theorem") {
  const auto dir = scratch("pipeline");
  CHECK(run({"generate", "--kind", "molecule", "--out-dir", dir.string(), "--name", "MOL"}) == 0);
  CHECK(fs::exists(dir / "MOL_node_labels.txt"));
  CHECK(run({"split", "--data-dir", dir.string(), "--name", "MOL", "--minority-count", "5",
             "--majority-count", "45", "--out", (dir / "split.json").string()}) == 0);
  CHECK(split_from_json(read_json(dir / "split.json")).train.size() == 50);
  CHECK(run({"train", "--data-dir", dir.string(), "--name", "MOL", "--split",
             (dir / "split.json").string(), "--epochs", "12", "--out-dir", (dir / "run").string()}) == 0);
  CHECK(run({"trace", "--scores", (dir / "run" / "scores.csv").string(), "--out",
             (dir / "trace.csv").string()}) == 0);
  const auto trace = read_text(dir / "trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 13);

  CHECK(run({"verify-theorem", "--instances", "5", "--out-dir", dir.string()}) == 0);
  const auto report = read_text(dir / "theorem_report.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 5 * 4 * 3);
  CHECK(report.find(",false,") == std::string::npos);
}
