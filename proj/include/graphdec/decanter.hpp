#pragma once

#include <vector>

#include "graphdec/numerics.hpp"

namespace graphdec {

// ---------------------------------------------------------------------------
// Contrastive loss

enum class InfoNceDenominator {
  negatives_only,    // sum over j != i
  include_positive,  // sum over all j
};

struct InfoNceResult {
  double loss = 0.0;     // mean over samples
  Vector per_sample;
  Matrix grad_first;     // d loss / d z1
  Matrix grad_second;    // d loss / d z2
};

/// L_i = -log( exp(s_ii / tau) / sum_j exp(s_ij / tau) ), s_ij = <z1_i, z2_j>.
/// Rows of z1 and z2 are the two views of the same N >= 2 samples.
InfoNceResult infonce_loss(const Matrix& z1, const Matrix& z2,
                           InfoNceDenominator denominator = InfoNceDenominator::negatives_only,
                           double temperature = 1.0);

// ---------------------------------------------------------------------------
// Scoring

struct ViewPredictions {
  Vector first;
  Vector second;
};

/// ||p' - p''||_2
double sample_score(const ViewPredictions& vp);

struct ScoredSample {
  int id = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Min-max normalizes raw scores (all 0.5 when constant) and sorts by raw
/// score descending, ties by ascending id.
std::vector<ScoredSample> normalize_and_rank(std::vector<ScoredSample> scores);

// ---------------------------------------------------------------------------
// Subset schedule and recycle bin

struct DecanterSchedule {
  int initial_size = 0;  // M(0)
  int horizon = 1;       // T
  int min_size = 0;      // floor

  /// max(8, ceil(0.05 * M(0))), capped at M(0).
  static int default_min_size(int initial_size);
  void validate() const;
};

/// Unrounded, unfloored M(0)/2 * (1 + cos(pi t / T)).
double raw_subset_size(const DecanterSchedule& sched, int t);

/// max(M_min, round(raw_subset_size)) for t in [1, T].
int subset_size_at(const DecanterSchedule& sched, int t);

struct DecanterState {
  std::vector<int> active;  // sorted ascending
  std::vector<int> bin;     // sorted ascending
  int subset_size = 0;
  double epsilon = 0.1;
  DecanterSchedule schedule;
  int epoch = 0;

  /// Throws unless active and bin are disjoint and |active| == subset_size.
  void check_invariants() const;
  std::vector<int> full_set() const;
};

DecanterState initial_decanter_state(std::vector<int> full_set, const DecanterSchedule& schedule,
                                     double epsilon);

/// Keeps the top M - floor(eps M) ranked actives and draws min(floor(eps M), |bin|)
/// samples uniformly from the current bin; a short draw is backfilled from the
/// next-ranked actives. `ranked` must be a permutation of the current actives.
DecanterState decant_update(const DecanterState& state, const std::vector<int>& ranked,
                            int next_size, RngStream& rng);

/// Same, with next_size = subset_size_at(schedule, epoch + 1).
DecanterState decant_update(const DecanterState& state, const std::vector<int>& ranked,
                            RngStream& rng);

}  // namespace graphdec
