#pragma once

#include <optional>
#include <vector>

#include "graphdec/trainer.hpp"

namespace graphdec {

/// Normalized scores laid out epochs x samples. Unscored cells hold -1.
struct ScoreTraceMatrix {
  std::vector<int> epochs;
  std::vector<int> sample_order;  // column -> sample id, by first-epoch rank
  Matrix values;
};

/// Requires every epoch 1..max to be present with the same sample set.
ScoreTraceMatrix score_trace_matrix(const std::vector<ScoreRecord>& records);

/// Sample ids in the top half of the scored samples of one row.
std::vector<int> top_half(const ScoreTraceMatrix& m, Eigen::Index row);

/// Mean over t of 1 - Jaccard(top half at t, top half at t + lag).
double mean_churn(const ScoreTraceMatrix& m, int lag = 10);

/// Samples in the bottom half at the first epoch that reach the top half later.
std::vector<int> bottom_to_top_promotions(const ScoreTraceMatrix& m);

struct SensitivityRow {
  int epoch = 0;
  std::optional<double> minority_mean;
  std::optional<double> majority_mean;
};

/// Per-epoch mean normalized score of scored minority and majority samples.
std::vector<SensitivityRow> minority_sensitivity(const std::vector<ScoreRecord>& records,
                                                 const GraphDataset& ds, int minority);

}  // namespace graphdec
