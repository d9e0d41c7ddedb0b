#pragma once

#include "json.hpp"

#include <vector>

#include "graphdec/model.hpp"

namespace graphdec {

struct SparsitySchedule {
  double alpha0 = 0.8;
  int horizon = 100;
  int reactivation_interval = 5;
  double alpha_min = 0.05;

  void validate() const;
};

/// Cosine-annealed keep fraction max(alpha_min, alpha0/2 * (1 + cos(pi t / T))), t in [1, T].
double alpha_at(const SparsitySchedule& sched, int t);

/// Entries kept per layer: max(1, ceil(alpha * size)).
Eigen::Index keep_count(double alpha, Eigen::Index size);

/// Flat (row-major) indices of the k largest scores; ties go to the lower index.
std::vector<Eigen::Index> top_k_flat(const Matrix& scores, Eigen::Index k);

/// Flat row-major index helpers.
Eigen::Index flat_index(const Matrix& m, Eigen::Index row, Eigen::Index col);
double& flat_ref(Matrix& m, Eigen::Index flat);

/// Magnitude pruning: per layer keep the top-k |w|.
SparsityMask prune_topk(const EncoderParams& params, double alpha);

/// Gradient-based reactivation: per layer the active set becomes the top-k |grad|.
SparsityMask reactivate(const EncoderParams& params, const ParamGrads& grads, double alpha);

/// Uniformly random masks with the same per-layer cardinality as prune_topk.
SparsityMask random_mask(const EncoderParams& params, double alpha, RngStream& rng);

/// {"epoch", "keep_fraction", "layers": [{"name", "rows", "cols", "active": [flat...]}]}
nlohmann::json mask_to_json(const SparsityMask& mask);
SparsityMask mask_from_json(const nlohmann::json& j);

}  // namespace graphdec
