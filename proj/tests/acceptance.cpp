// Acceptance checks. Prints one PASS/FAIL line per criterion, exits non-zero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <quadmath.h>
#include <set>

#include "graphdec/analysis.hpp"
#include "graphdec/cli.hpp"
#include "graphdec/io.hpp"
#include "graphdec/sparsifier.hpp"
#include "graphdec/theorylab.hpp"
#include "test_support.hpp"

using namespace graphdec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(2024, "accept");
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int fdim = 1 + static_cast<int>(rng.uniform_int(5));
    std::vector<std::pair<Graph, Graph>> pairs;
    for (int i = 0; i < 4; ++i) {
      const Graph g = testing::random_graph(rng, 2 + static_cast<int>(rng.uniform_int(5)), fdim);
      auto [a, b] = make_views(g, AugmentSpec{}, rng);
      pairs.emplace_back(a.graph, b.graph);
    }
    RngStream init = rng.substream(static_cast<std::uint64_t>(trial));
    const auto params = EncoderParams::init(fdim, 6, 4, init);
    const auto mask = prune_topk(params, 0.7);
    ParamGrads grads;
    testing::contrastive_objective(pairs, params, mask, &grads);
    grads = apply_mask(grads, mask);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const LossFn f = [&](const Matrix& w) {
        EncoderParams p = params;
        p.layers[l] = w;
        return testing::contrastive_objective(pairs, p, mask);
      };
      worst = std::max(worst, finite_diff_check(f, params.layers[l], grads[l], 1e-5).max_relative_error);
    }
  }
  const double secs = since(t0);
  return {worst <= 1e-4 && secs < 10.0, fmt("max rel err %.3g, %.2fs", worst, secs)};
}

bool within_ulp(double got, __float128 want) {
  const auto w = static_cast<double>(want);
  return got == w || got == std::nextafter(w, got);
}

// Oracle: the cosine form in 113-bit quad precision.
__float128 quad_decay(double scale, int t, int horizon) {
  return static_cast<__float128>(scale) / 2 * (1 + cosq(M_PIq * t / horizon));
}

Outcome schedule_closed_forms() {
  constexpr int T = 100;
  int misses = 0;
  for (double a0 : {0.8, 1.0}) {
    SparsitySchedule s;
    s.alpha0 = a0;
    s.horizon = T;
    for (int t = 1; t <= T; ++t) {
      const __float128 raw = quad_decay(a0, t, T);
      const __float128 floor = s.alpha_min;
      misses += !within_ulp(alpha_at(s, t), raw > floor ? raw : floor);
    }
  }
  DecanterSchedule d{1000, T, DecanterSchedule::default_min_size(1000)};
  double sum = 0;
  for (int t = 1; t <= T; ++t) {
    const __float128 raw = quad_decay(1000.0, t, T);
    misses += !within_ulp(raw_subset_size(d, t), raw);
    misses += subset_size_at(d, t) != std::max(d.min_size, static_cast<int>(std::lround(static_cast<double>(raw))));
    sum += raw_subset_size(d, t) / 1000.0;
  }
  const double gap = std::abs(sum / T - (0.5 - 1.0 / (2.0 * T)));
  return {misses == 0 && gap <= 1e-12, fmt("%g points beyond 1 ulp, mean raw fraction off by %.2g", misses, gap)};
}

Outcome pruning_invariants() {
  RngStream rng(7, "accept");
  int bad_card = 0, bad_invariance = 0, bad_react = 0, brute = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int in = 1 + static_cast<int>(rng.uniform_int(6));
    const int hidden = 1 + static_cast<int>(rng.uniform_int(6));
    const int embed = 1 + static_cast<int>(rng.uniform_int(5));
    RngStream init = rng.substream(static_cast<std::uint64_t>(trial));
    auto params = EncoderParams::init(in, hidden, embed, init);
    const double alpha = 0.01 + 0.99 * rng.uniform();
    const auto mask = prune_topk(params, alpha);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const auto n = params.layers[l].size();
      const auto k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(alpha * n)));
      bad_card += mask.active_count(l) != k;
    }

    const Graph g = testing::random_graph(rng, 2 + static_cast<int>(rng.uniform_int(5)), in);
    const auto before = forward(g, params, mask).graph_embedding;
    auto scrambled = params;
    for (std::size_t l = 0; l < params.layers.size(); ++l)
      for (Eigen::Index i = 0; i < params.layers[l].size(); ++i)
        if (mask.keep[l].data()[i] == 0.0) scrambled.layers[l].data()[i] = 100.0 * rng.normal();
    bad_invariance += forward(g, scrambled, mask).graph_embedding != before;

    ParamGrads grads = zero_grads_like(params);
    for (auto& gm : grads)
      for (Eigen::Index i = 0; i < gm.size(); ++i) gm.data()[i] = std::round(rng.normal() * 4) / 4;
    const auto react = reactivate(params, grads, alpha);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const Matrix& gm = grads[l];
      if (gm.size() > 20) continue;
      ++brute;
      const auto k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(alpha * gm.size())));
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(gm.size()));
      for (Eigen::Index f = 0; f < gm.size(); ++f) idx[static_cast<std::size_t>(f)] = f;
      auto mag = [&](Eigen::Index f) { return std::abs(gm(f / gm.cols(), f % gm.cols())); };
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return mag(a) > mag(b); });
      Matrix want = Matrix::Zero(gm.rows(), gm.cols());
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto f = idx[static_cast<std::size_t>(j)];
        want(f / gm.cols(), f % gm.cols()) = 1.0;
      }
      bad_react += react.keep[l] != want;
    }
  }
  const bool ok = bad_card == 0 && bad_invariance == 0 && bad_react == 0 && brute > 0;
  return {ok, fmt("cardinality %g, invariance %g, reactivation %g failures (%g brute-force layers)",
                  bad_card, bad_invariance, bad_react, brute)};
}

Outcome theorem_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  TheoremSuiteSpec spec;
  spec.instances = 100;
  spec.seeds = {0, 1, 2};
  spec.policies = {SubsetPolicy::full, SubsetPolicy::random_k, SubsetPolicy::diet_static,
                   SubsetPolicy::decant_dynamic};
  const auto rows = run_theorem_suite(spec);
  int violations = 0, inexact = 0;
  for (const auto& r : rows) {
    violations += !r.report.holds;
    inexact += !r.full_error_exact;
  }
  const double secs = since(t0);
  const bool ok = rows.size() == 1200 && violations == 0 && inexact == 0 && secs < 60.0;
  return {ok, fmt("%g rows, %g violations, %g inexact full-set rows, %.2fs",
                  static_cast<double>(rows.size()), violations, inexact, secs)};
}

Outcome decanter_laws() {
  std::vector<int> all(100);
  for (int i = 0; i < 100; ++i) all[static_cast<std::size_t>(i)] = i;
  DecanterSchedule sched{100, 200, DecanterSchedule::default_min_size(100)};
  auto state = initial_decanter_state(all, sched, 0.1);
  RngStream scores(31, "accept");
  int broken = 0;
  std::set<int> ever_binned, returned;
  for (int t = 1; t < 200; ++t) {
    std::vector<ScoredSample> s;
    for (int id : state.active) s.push_back({id, scores.uniform(), 0});
    std::vector<int> ranked;
    for (const auto& r : normalize_and_rank(s)) ranked.push_back(r.id);
    RngStream rng = RngStream(31, "recycle").substream(static_cast<std::uint64_t>(t));
    const auto old_bin = state.bin;
    state = decant_update(state, ranked, rng);
    try {
      state.check_invariants();
    } catch (const ContractViolation&) {
      ++broken;
    }
    broken += state.full_set() != all;
    broken += static_cast<int>(state.active.size()) != subset_size_at(sched, t);
    for (int id : state.active)
      if (std::binary_search(old_bin.begin(), old_bin.end(), id)) returned.insert(id);
    ever_binned.insert(state.bin.begin(), state.bin.end());
  }
  const double reach = static_cast<double>(returned.size()) / static_cast<double>(ever_binned.size());
  return {broken == 0 && reach >= 0.95, fmt("%g law violations, %.2f of binned samples re-entered",
                                            broken, reach)};
}

Outcome minority_sensitivity_check() {
  const auto t0 = std::chrono::steady_clock::now();
  int seeds_ok = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SyntheticSpec spec;
    spec.class0_count = 900;
    spec.class1_count = 100;
    spec.seed = seed;
    const auto ds = generate_synthetic_imbalanced(spec);
    SplitResult split;
    for (int i = 0; i < ds.unit_count(); ++i) split.train.push_back(i);
    split.test = split.train;
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = seed;
    const auto result = train(ds, split, cfg);
    int wins = 0, total = 0;
    for (const auto& row : minority_sensitivity(result.scores, ds, 1)) {
      if (row.epoch <= cfg.warmup_epochs || !row.minority_mean || !row.majority_mean) continue;
      ++total;
      wins += *row.minority_mean > *row.majority_mean;
    }
    const double frac = total ? static_cast<double>(wins) / total : 0.0;
    seeds_ok += frac >= 0.7;
    detail += fmt("seed %g: %.2f; ", static_cast<double>(seed), frac);
  }
  const double secs = since(t0);
  return {seeds_ok >= 2 && secs < 300.0, detail + fmt("%.1fs", secs)};
}

Outcome dynamic_vs_static() {
  SyntheticSpec spec;
  spec.class0_count = 900;
  spec.class1_count = 100;
  const auto ds = generate_synthetic_imbalanced(spec);
  SplitResult split;
  for (int i = 0; i < ds.unit_count(); ++i) split.train.push_back(i);
  split.test = split.train;
  TrainConfig cfg;
  cfg.epochs = 60;
  const auto dynamic = train(ds, split, cfg);
  const auto m = score_trace_matrix(dynamic.scores);
  const double churn = mean_churn(m, 10);
  const auto promos = bottom_to_top_promotions(m).size();

  TrainConfig diet = cfg;
  diet.selector = Selector::data_diet;
  diet.diet.pick_epoch = 10;
  const auto stat = train(ds, split, diet);
  bool constant = stat.diet_subset.has_value();
  for (std::size_t t = static_cast<std::size_t>(diet.diet.pick_epoch); t < stat.subsets.size(); ++t)
    constant &= stat.subsets[t] == stat.subsets[static_cast<std::size_t>(diet.diet.pick_epoch)];
  return {churn > 0.05 && promos >= 1 && constant,
          fmt("churn %.3f, %g promotions, static subset constant: %g", churn,
              static_cast<double>(promos), constant)};
}

Outcome molecule_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<Selector, double> mean;
  int floor_hits = 0;
  double worst_budget = 0.0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    MoleculeSpec ms;
    ms.seed = seed;
    const auto ds = generate_molecule_like(ms);
    const auto split = make_imbalanced_split(ds, SplitSpec::binary(0, 5, 45, 0.25, seed));
    for (auto sel : {Selector::graphdec, Selector::random_subset, Selector::vanilla}) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.selector = sel;
      const auto r = train(ds, split, cfg);
      const auto e = evaluate(ds, split, r.params, r.mask, cfg.probe);
      mean[sel] += e.f1_macro / 3.0;
      if (sel == Selector::graphdec) {
        floor_hits += e.f1_macro >= 0.65;
        worst_budget = std::max(worst_budget, r.data_budget);
      }
    }
  }
  const double g = mean[Selector::graphdec], rnd = mean[Selector::random_subset],
               van = mean[Selector::vanilla];
  const bool ok = g - rnd >= 0.03 && g >= van - 0.02 && worst_budget <= 0.55 && floor_hits >= 2 &&
                  since(t0) < 600.0;
  return {ok, fmt("F1 graphdec %.3f, random %.3f, vanilla %.3f, budget %.3f", g, rnd, van, worst_budget) +
                  fmt(", %g seeds above floor", floor_hits)};
}

Outcome metrics_oracle() {
  RngStream rng(9, "accept");
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(4));
    const int n = 1 + static_cast<int>(rng.uniform_int(60));
    std::vector<int> p(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      p[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
    }
    std::vector<std::vector<int>> cm(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k)));
    for (int i = 0; i < n; ++i) ++cm[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])][static_cast<std::size_t>(p[static_cast<std::size_t>(i)])];
    double correct = 0, recall_sum = 0, f1_sum = 0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
      double tp = cm[c][c], row = 0, col = 0;
      for (int j = 0; j < k; ++j) {
        row += cm[c][j];
        col += cm[j][c];
      }
      correct += tp;
      if (row > 0) {
        recall_sum += tp / row;
        ++present;
      }
      f1_sum += (row + col) > 0 ? 2 * tp / (row + col) : 0.0;
    }
    const auto rep = compute_metrics(p, y, k);
    worst = std::max({worst, std::abs(rep.accuracy - correct / n),
                      std::abs(rep.f1_micro - correct / n),
                      std::abs(rep.balanced_accuracy - recall_sum / present),
                      std::abs(rep.f1_macro - f1_sum / k)});
  }
  return {worst <= 1e-12, fmt("max deviation %.3g", worst)};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "graphdec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "graphdec_accept_determinism";
  fs::remove_all(root);
  std::vector<fs::path> runs{root / "a", root / "b"};
  for (const auto& dir : runs) {
    const int code = cli({"train", "--builtin", "molecule", "--minority-count", "5",
                          "--majority-count", "45", "--epochs", "20", "--seed", "3", "--workers",
                          "1", "--out-dir", dir.string()});
    if (code != 0) return {false, fmt("train exited with %g", code)};
  }
  const auto ra = read_json(runs[0] / "report.json"), rb = read_json(runs[1] / "report.json");
  const bool same_eval = ra.at("eval").dump() == rb.at("eval").dump();
  const bool same_scores = read_text(runs[0] / "scores.csv") == read_text(runs[1] / "scores.csv");
  return {same_eval && same_scores,
          fmt("eval identical: %g, scores.csv identical: %g", same_eval, same_scores)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"schedule closed forms", schedule_closed_forms},
      {"pruning invariants", pruning_invariants},
      {"convergence bound suite", theorem_suite},
      {"decanter laws", decanter_laws},
      {"minority sensitivity", minority_sensitivity_check},
      {"dynamic vs static selection", dynamic_vs_static},
      {"molecule end to end", molecule_end_to_end},
      {"metrics oracle", metrics_oracle},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
