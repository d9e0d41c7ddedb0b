#include "graphdec/cli.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>

#include "graphdec/analysis.hpp"
#include "graphdec/config.hpp"
#include "graphdec/io.hpp"
#include "graphdec/theorylab.hpp"
#include "graphdec/trainer.hpp"

namespace graphdec {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct DataOptions {
  std::string data_dir;
  std::string name;
  std::string builtin;
  std::uint64_t data_seed = 0;
  int degree_cap = 10;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir, "Directory holding a TU-format dataset");
    cmd->add_option("--name", name, "Dataset name inside --data-dir");
    cmd->add_option("--builtin", builtin, "Generated dataset: synthetic, molecule or node")
        ->check(CLI::IsMember({"synthetic", "molecule", "node"}));
    cmd->add_option("--data-seed", data_seed, "Seed for --builtin datasets");
    cmd->add_option("--degree-cap", degree_cap, "Degree one-hot cap for unlabeled nodes");
  }

  GraphDataset load() const {
    if (!builtin.empty()) {
      if (builtin == "synthetic") {
        SyntheticSpec s;
        s.seed = data_seed;
        s.degree_cap = degree_cap;
        return generate_synthetic_imbalanced(s);
      }
      if (builtin == "molecule") {
        MoleculeSpec s;
        s.seed = data_seed;
        return generate_molecule_like(s);
      }
      NodeDatasetSpec s;
      s.seed = data_seed;
      return generate_node_dataset(s);
    }
    if (data_dir.empty() || name.empty())
      throw ConfigError("need --data-dir and --name, or --builtin");
    return load_tu_dataset(data_dir, name, TuLoadOptions{degree_cap});
  }
};

struct SplitOptions {
  std::string split_file;
  int minority_count = -1;
  int majority_count = -1;
  double longtail_ratio = -1;
  int base_count = 20;
  double validation_fraction = 0.25;
  std::uint64_t split_seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--split", split_file, "Split JSON written by the split command");
    cmd->add_option("--minority-count", minority_count, "Minority-class training samples");
    cmd->add_option("--majority-count", majority_count, "Majority-class training samples");
    cmd->add_option("--longtail-ratio", longtail_ratio, "Node-level long-tail imbalance ratio");
    cmd->add_option("--base-count", base_count, "Largest class count for long-tail splits");
    cmd->add_option("--validation-fraction", validation_fraction, "Share of the remainder");
    cmd->add_option("--split-seed", split_seed, "Seed for split sampling");
  }

  /// Without split flags every unit is used for both fitting and reporting.
  SplitResult make(const GraphDataset& ds) const {
    if (!split_file.empty()) return split_from_json(read_json(split_file));
    if (longtail_ratio > 0)
      return make_longtail_node_split(ds, longtail_ratio, base_count, validation_fraction,
                                      split_seed);
    if (minority_count >= 0 || majority_count >= 0) {
      if (minority_count < 0 || majority_count < 0)
        throw ConfigError("--minority-count and --majority-count go together");
      if (ds.class_count != 2) throw ConfigError("minority/majority split needs 2 classes");
      return make_imbalanced_split(
          ds, SplitSpec::binary(minority_class(ds), minority_count, majority_count,
                                validation_fraction, split_seed));
    }
    SplitResult s;
    if (ds.task == TaskKind::node) {
      s.train = ds.labeled_nodes;
    } else {
      for (int i = 0; i < ds.unit_count(); ++i) s.train.push_back(i);
    }
    s.test = s.train;
    return s;
  }
};

int cmd_generate(const std::string& kind, const std::string& out_dir, const std::string& name,
                 std::uint64_t seed, SyntheticSpec syn, MoleculeSpec mol) {
  if (kind == "synthetic") {
    syn.seed = seed;
    write_tu_dataset(generate_synthetic_imbalanced(syn), out_dir, name);
  } else {
    mol.seed = seed;
    std::vector<int> atoms;
    const auto ds = generate_molecule_like(mol, &atoms);
    write_tu_dataset(ds, out_dir, name, &atoms);
  }
  std::cout << "wrote " << name << " to " << out_dir << "\n";
  return 0;
}

struct TrainFlags {
  std::optional<std::string> selector;
  std::optional<int> epochs;
  std::optional<double> alpha0;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string ablate;
  std::vector<std::string> settings;
  std::string config;
  bool dump_masks = false;
  std::string out_dir = "run";
};

std::vector<Setting> collect_overrides(const TrainFlags& f) {
  std::vector<Setting> o;
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.selector) o.emplace_back("train.selector", *f.selector);
  if (f.epochs) o.emplace_back("train.epochs", std::to_string(*f.epochs));
  if (f.alpha0) o.emplace_back("sparsity.alpha0", format_g9(*f.alpha0));
  if (f.epsilon) o.emplace_back("decanter.epsilon", format_g9(*f.epsilon));
  if (f.seed) o.emplace_back("train.seed", std::to_string(*f.seed));
  if (f.workers) o.emplace_back("train.workers", std::to_string(*f.workers));
  return o;
}

int cmd_train(const DataOptions& data, const SplitOptions& split_opts, const TrainFlags& flags) {
  const std::string started = timestamp();
  std::vector<Setting> overrides = collect_overrides(flags);
  TrainConfig cfg = load_config(
      flags.config.empty() ? std::nullopt : std::optional<fs::path>(flags.config), overrides);
  if (!flags.ablate.empty()) {
    cfg.ablation.disable(flags.ablate);
    cfg.validate();
  }
  if (flags.dump_masks) cfg.keep_mask_snapshots = true;

  const GraphDataset ds = data.load();
  const SplitResult split = split_opts.make(ds);
  const fs::path out(flags.out_dir);

  const TrainResult result = train(ds, split, cfg);
  const EvalReport eval = evaluate(ds, split, result.params, result.mask, cfg.probe);

  write_metrics_jsonl(out / "metrics.jsonl", result.traces);
  write_scores_csv(out / "scores.csv", result.scores);
  write_text(out / "config.ini", config_to_ini(cfg));
  write_json(out / "split.json", split_to_json(split));
  for (const auto& [file, ids] : {std::pair{"embeddings_train.csv", &split.train},
                                  std::pair{"embeddings_test.csv", &split.test}}) {
    EmbeddingTable table{*ids, labels_of(ds, *ids),
                         embed_dataset(ds, *ids, result.params, result.mask)};
    write_embeddings_csv(out / file, table);
  }
  if (flags.dump_masks) {
    nlohmann::json masks = nlohmann::json::array();
    for (const auto& m : result.mask_snapshots) masks.push_back(mask_to_json(m));
    write_json(out / "masks.json", masks);
  }

  nlohmann::json config_echo = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(cfg)) config_echo[k] = v;
  nlohmann::json report{
      {"eval", eval_to_json(eval)},
      {"data_budget", result.data_budget},
      {"train_class_counts", class_counts(ds, split.train)},
      {"test_class_counts", class_counts(ds, split.test)},
      {"manifest",
       {{"config", config_echo},
        {"seed", cfg.seed},
        {"dataset_fingerprint", hex64(dataset_fingerprint(ds))},
        {"tool_version", kVersion},
        {"started_at", started},
        {"finished_at", timestamp()}}}};
  write_json(out / "report.json", report);

  std::printf("accuracy %.4f  bAcc %.4f  F1-macro %.4f  F1-micro %.4f  data budget %.3f\n",
              eval.accuracy, eval.balanced_accuracy, eval.f1_macro, eval.f1_micro,
              result.data_budget);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Joint data and weight sparsity for graph contrastive learning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset in TU format");
  std::string gen_kind = "synthetic", gen_out = "data", gen_name = "SYNTH";
  std::uint64_t gen_seed = 0;
  SyntheticSpec syn;
  MoleculeSpec mol;
  gen->add_option("--kind", gen_kind, "synthetic or molecule")
      ->check(CLI::IsMember({"synthetic", "molecule"}));
  gen->add_option("--out-dir", gen_out, "Output directory");
  gen->add_option("--name", gen_name, "Dataset name");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--class0", syn.class0_count, "Cycle graphs (synthetic)");
  gen->add_option("--class1", syn.class1_count, "Star graphs (synthetic)");
  gen->add_option("--min-nodes", syn.min_nodes, "Smallest graph (synthetic)");
  gen->add_option("--max-nodes", syn.max_nodes, "Largest graph (synthetic)");
  gen->add_option("--noise", syn.noise_edge_prob, "Noise edge probability (synthetic)");
  gen->add_option("--negatives", mol.negative_count, "Class 0 molecules");
  gen->add_option("--positives", mol.positive_count, "Class 1 molecules");
  gen->add_option("--label-noise", mol.label_noise, "Share of molecules built from the other class");

  // split
  auto* split_cmd = app.add_subcommand("split", "Write an imbalanced split as JSON");
  DataOptions split_data;
  SplitOptions split_opts;
  std::string split_out = "split.json";
  split_data.add_to(split_cmd);
  split_opts.add_to(split_cmd);
  split_cmd->add_option("--out", split_out, "Output JSON path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Contrastive pre-training and linear evaluation");
  DataOptions train_data;
  SplitOptions train_split;
  TrainFlags flags;
  train_data.add_to(train_cmd);
  train_split.add_to(train_cmd);
  train_cmd->add_option("--config", flags.config, "INI config file");
  train_cmd->add_option("--set", flags.settings, "Config override key=value (repeatable)");
  train_cmd->add_option("--selector", flags.selector, "graphdec, vanilla, random_subset, data_diet");
  train_cmd->add_option("--epochs", flags.epochs, "Training epochs");
  train_cmd->add_option("--alpha0", flags.alpha0, "Initial model keep fraction");
  train_cmd->add_option("--epsilon", flags.epsilon, "Recycle-bin exploration rate");
  train_cmd->add_option("--seed", flags.seed, "Root seed");
  train_cmd->add_option("--workers", flags.workers, "Worker threads for per-sample work");
  train_cmd->add_option("--ablate", flags.ablate, "Comma list of toggles to disable");
  train_cmd->add_flag("--dump-masks", flags.dump_masks, "Write masks.json");
  train_cmd->add_option("--out-dir", flags.out_dir, "Output directory");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Linear probe on saved embeddings");
  std::string eval_train, eval_test, eval_out;
  ProbeConfig probe;
  eval_cmd->add_option("--train-embeddings", eval_train, "Fit set CSV")->required();
  eval_cmd->add_option("--test-embeddings", eval_test, "Report set CSV")->required();
  eval_cmd->add_option("--probe-epochs", probe.epochs, "Probe epochs");
  eval_cmd->add_option("--probe-lr", probe.learning_rate, "Probe learning rate");
  eval_cmd->add_option("--probe-l2", probe.l2, "Probe L2 strength");
  eval_cmd->add_flag("--balanced", probe.balanced, "Inverse-frequency class weights");
  eval_cmd->add_option("--out", eval_out, "Write the report here instead of stdout");

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "Export the score-trace matrix");
  std::string trace_scores, trace_out = "trace.csv";
  int trace_lag = 10;
  trace_cmd->add_option("--scores", trace_scores, "scores.csv from a train run")->required();
  trace_cmd->add_option("--out", trace_out, "Output CSV");
  trace_cmd->add_option("--lag", trace_lag, "Epoch lag for the churn statistic");

  // verify-theorem
  auto* theorem_cmd = app.add_subcommand("verify-theorem", "Check the subset-gradient bound");
  TheoremSuiteSpec suite;
  int seed_count = 3;
  std::string theorem_out = ".";
  theorem_cmd->add_option("--instances", suite.instances, "Random convex instances");
  theorem_cmd->add_option("--seeds", seed_count, "Seeds per instance and policy");
  theorem_cmd->add_option("--horizon", suite.horizon, "Iterations T");
  theorem_cmd->add_option("--base-seed", suite.base_seed, "Instance generator seed");
  theorem_cmd->add_option("--workers", suite.workers, "Worker threads");
  theorem_cmd->add_option("--out-dir", theorem_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*gen) return cmd_generate(gen_kind, gen_out, gen_name, gen_seed, syn, mol);
    if (*split_cmd) {
      const auto ds = split_data.load();
      const auto s = split_opts.make(ds);
      write_json(split_out, split_to_json(s));
      std::cout << "train " << s.train.size() << "  validation " << s.validation.size()
                << "  test " << s.test.size() << "\n";
      return 0;
    }
    if (*train_cmd) return cmd_train(train_data, train_split, flags);
    if (*eval_cmd) {
      const auto tr = read_embeddings_csv(eval_train);
      const auto te = read_embeddings_csv(eval_test);
      int classes = 0;
      for (int y : tr.labels) classes = std::max(classes, y + 1);
      for (int y : te.labels) classes = std::max(classes, y + 1);
      const auto rep = linear_probe(tr.values, tr.labels, te.values, te.labels, classes, probe);
      const auto j = eval_to_json(rep);
      if (eval_out.empty()) std::cout << j.dump(2) << "\n";
      else write_json(eval_out, j);
      return 0;
    }
    if (*trace_cmd) {
      const auto m = score_trace_matrix(read_scores_csv(trace_scores));
      write_trace_csv(trace_out, m);
      std::cout << "epochs " << m.values.rows() << "  samples " << m.values.cols();
      if (m.values.rows() > trace_lag)
        std::cout << "  churn " << format_g9(mean_churn(m, trace_lag)) << "  promotions "
                  << bottom_to_top_promotions(m).size();
      std::cout << "\n";
      return 0;
    }
    if (*theorem_cmd) {
      if (seed_count < 1) throw ConfigError("--seeds must be >= 1");
      suite.seeds.clear();
      for (int s = 0; s < seed_count; ++s) suite.seeds.push_back(static_cast<std::uint64_t>(s));
      const auto rows = run_theorem_suite(suite);
      write_theorem_report(fs::path(theorem_out) / "theorem_report.csv", rows);
      int violations = 0;
      for (const auto& r : rows) violations += (r.report.holds && r.full_error_exact) ? 0 : 1;
      std::cout << rows.size() << " runs, " << violations << " violations\n";
      return violations == 0 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const LoadError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}

}  // namespace graphdec
