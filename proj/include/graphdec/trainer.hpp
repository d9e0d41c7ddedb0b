#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphdec/augment.hpp"
#include "graphdec/decanter.hpp"
#include "graphdec/encoder.hpp"
#include "graphdec/graph.hpp"
#include "graphdec/metrics.hpp"
#include "graphdec/sparsifier.hpp"

namespace graphdec {

enum class Selector { graphdec, vanilla, random_subset, data_diet };

std::string to_string(Selector s);
Selector selector_from_string(const std::string& name);

/// Component switches. All on reproduces the full method.
struct Ablation {
  bool gs = true;                // gradient-ranked selection (off: uniform subset)
  bool ss = true;                // train on the subset (off: full set, scores still logged)
  bool cad = true;               // cosine subset decay (off: fixed one-shot target size)
  bool rs = true;                // recycle bin sampling (off: epsilon = 0)
  bool rm = true;                // magnitude pruning (off: uniform random masks)
  bool sg = true;                // sparse model (off: dense)
  bool cag = true;               // cosine keep-fraction decay (off: final fraction from t = 1)
  bool rw = true;                // gradient reactivation
  bool self_supervision = true;  // off: supervised cross-entropy objective and scores

  static Ablation all_off();
  /// Turns off a comma-separated list of toggle names (case-insensitive).
  void disable(const std::string& names);
};

struct DecanterConfig {
  double initial_fraction = 1.0;  // M(0) / |train|
  double epsilon = 0.1;
  int min_size = -1;              // < 0: DecanterSchedule::default_min_size
};

struct DietConfig {
  int pick_epoch = 10;
  double keep_fraction = 0.5;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.0;
  int hidden_dim = 64;
  int embed_dim = 64;
  int warmup_epochs = 3;
  double temperature = 1.0;
  InfoNceDenominator denominator = InfoNceDenominator::negatives_only;
  AugmentSpec augment;
  SparsitySchedule sparsity;  // horizon is taken from epochs
  DecanterConfig decanter;
  DietConfig diet;
  Selector selector = Selector::graphdec;
  Ablation ablation;
  std::uint64_t seed = 0;
  ProbeConfig probe;
  int workers = 1;
  bool keep_mask_snapshots = false;

  void validate() const;
  SparsitySchedule resolved_sparsity() const;
};

struct EpochTrace {
  int epoch = 0;
  double mean_loss = 0.0;
  int subset_size = 0;
  double keep_fraction = 1.0;
  std::vector<int> subset_class_counts;
  int scored_count = 0;
  double seconds = 0.0;
};

/// One row of scores.csv. Unscored samples carry raw = normalized = -1.
struct ScoreRecord {
  int epoch = 0;
  int sample_id = 0;
  double raw_score = -1.0;
  double normalized_score = -1.0;
  bool in_subset = false;
  bool in_bin = false;
};

struct TrainResult {
  EncoderParams params;
  SparsityMask mask;
  std::vector<EpochTrace> traces;
  std::vector<ScoreRecord> scores;
  std::vector<std::vector<int>> subsets;  // training ids per epoch
  std::vector<SparsityMask> mask_snapshots;
  std::optional<std::vector<int>> diet_subset;
  long scored_sample_epochs = 0;
  /// scored sample-epochs / (|train| * T)
  double data_budget = 0.0;
};

TrainResult train(const GraphDataset& ds, const SplitResult& split, const TrainConfig& cfg);

/// Trains for pick_epoch epochs, scores once, and keeps the top fraction.
std::vector<int> select_data_diet(const GraphDataset& ds, const SplitResult& split,
                                  const TrainConfig& cfg, int pick_epoch, double keep_fraction);

/// Linear probe on clean embeddings of train (fit) and test (report).
EvalReport evaluate(const GraphDataset& ds, const SplitResult& split, const EncoderParams& params,
                    const SparsityMask& mask, const ProbeConfig& probe);

std::vector<int> labels_of(const GraphDataset& ds, const std::vector<int>& ids);

}  // namespace graphdec
