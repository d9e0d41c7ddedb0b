#include "graphdec/decanter.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

namespace graphdec {

InfoNceResult infonce_loss(const Matrix& z1, const Matrix& z2, InfoNceDenominator denominator,
                           double temperature) {
  require(z1.rows() == z2.rows() && z1.cols() == z2.cols(), "infonce_loss: view shapes differ");
  require(z1.rows() >= 2, "infonce_loss: need at least 2 samples for a negative");
  require(temperature > 0, "infonce_loss: temperature must be positive");
  const Eigen::Index n = z1.rows();
  const Matrix logits = (z1 * z2.transpose()) / temperature;
  const bool include_positive = denominator == InfoNceDenominator::include_positive;

  InfoNceResult res;
  res.per_sample.resize(n);
  Matrix coeff = Matrix::Zero(n, n);  // d L_i / d logits(i, j)
  for (Eigen::Index i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (include_positive || j != i) top = std::max(top, logits(i, j));
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (include_positive || j != i) sum += std::exp(logits(i, j) - top);
    const double log_denominator = top + std::log(sum);
    res.per_sample[i] = log_denominator - logits(i, i);
    for (Eigen::Index j = 0; j < n; ++j)
      if (include_positive || j != i) coeff(i, j) = std::exp(logits(i, j) - log_denominator);
    coeff(i, i) -= 1.0;
  }
  res.loss = res.per_sample.mean();
  coeff /= static_cast<double>(n) * temperature;
  res.grad_first = coeff * z2;
  res.grad_second = coeff.transpose() * z1;
  return res;
}

double sample_score(const ViewPredictions& vp) {
  require(vp.first.size() == vp.second.size(), "sample_score: prediction sizes differ");
  return (vp.first - vp.second).norm();
}

std::vector<ScoredSample> normalize_and_rank(std::vector<ScoredSample> scores) {
  require(!scores.empty(), "normalize_and_rank: no scores");
  const auto [lo_it, hi_it] = std::minmax_element(
      scores.begin(), scores.end(),
      [](const ScoredSample& a, const ScoredSample& b) { return a.raw < b.raw; });
  const double lo = lo_it->raw;
  const double hi = hi_it->raw;
  for (auto& s : scores) s.normalized = hi > lo ? (s.raw - lo) / (hi - lo) : 0.5;
  std::sort(scores.begin(), scores.end(), [](const ScoredSample& a, const ScoredSample& b) {
    return a.raw > b.raw || (a.raw == b.raw && a.id < b.id);
  });
  return scores;
}

int DecanterSchedule::default_min_size(int initial_size) {
  const int floor = std::max(8, static_cast<int>(std::ceil(0.05 * initial_size)));
  return std::min(floor, initial_size);
}

void DecanterSchedule::validate() const {
  require(initial_size >= 1, "decanter schedule: M(0) must be >= 1");
  require(horizon >= 1, "decanter schedule: horizon must be >= 1");
  require(min_size >= 0 && min_size <= initial_size,
          "decanter schedule: need 0 <= M_min <= M(0)");
}

double raw_subset_size(const DecanterSchedule& sched, int t) {
  return cosine_decay(sched.initial_size, t, sched.horizon);
}

int subset_size_at(const DecanterSchedule& sched, int t) {
  sched.validate();
  if (t < 1 || t > sched.horizon)
    throw ContractViolation("subset_size_at: epoch " + std::to_string(t) + " outside [1, " +
                            std::to_string(sched.horizon) + "]");
  return std::max(sched.min_size, static_cast<int>(std::lround(raw_subset_size(sched, t))));
}

void DecanterState::check_invariants() const {
  require(std::is_sorted(active.begin(), active.end()), "decanter: active set not sorted");
  require(std::is_sorted(bin.begin(), bin.end()), "decanter: bin not sorted");
  std::vector<int> common;
  std::set_intersection(active.begin(), active.end(), bin.begin(), bin.end(),
                        std::back_inserter(common));
  require(common.empty(), "decanter: active set and bin overlap");
  require(static_cast<int>(active.size()) == subset_size, "decanter: |active| != M(t)");
}

std::vector<int> DecanterState::full_set() const {
  std::vector<int> all;
  std::merge(active.begin(), active.end(), bin.begin(), bin.end(), std::back_inserter(all));
  return all;
}

DecanterState initial_decanter_state(std::vector<int> full_set, const DecanterSchedule& schedule,
                                     double epsilon) {
  schedule.validate();
  require(epsilon >= 0 && epsilon < 1, "decanter: epsilon outside [0, 1)");
  std::sort(full_set.begin(), full_set.end());
  require(std::adjacent_find(full_set.begin(), full_set.end()) == full_set.end(),
          "decanter: duplicate sample ids");
  DecanterState s;
  s.active = std::move(full_set);
  s.subset_size = static_cast<int>(s.active.size());
  s.epsilon = epsilon;
  s.schedule = schedule;
  s.epoch = 0;
  return s;
}

DecanterState decant_update(const DecanterState& state, const std::vector<int>& ranked,
                            int next_size, RngStream& rng) {
  state.check_invariants();
  {
    auto sorted = ranked;
    std::sort(sorted.begin(), sorted.end());
    require(sorted == state.active, "decant_update: ranked ids must be the current active set");
  }
  const int full = static_cast<int>(state.active.size() + state.bin.size());
  if (next_size > full || next_size < 0) {
    std::ostringstream msg;
    msg << "decant_update: M(t+1) = " << next_size << " exceeds the training set size " << full;
    throw ContractViolation(msg.str());
  }

  const int recycle_wanted = static_cast<int>(std::floor(state.epsilon * next_size + 1e-9));
  const int recycled = std::min(recycle_wanted, static_cast<int>(state.bin.size()));
  // Top ranked actives fill whatever the bin does not supply.
  const int kept = std::min(next_size - recycled, static_cast<int>(ranked.size()));
  // Only reachable when the subset grows past the ranked set.
  const int extra = next_size - recycled - kept;

  std::vector<int> next_active(ranked.begin(), ranked.begin() + kept);
  const auto draws =
      rng.sample_without_replacement(static_cast<int>(state.bin.size()), recycled + extra);
  for (int d : draws) next_active.push_back(state.bin[d]);
  std::sort(next_active.begin(), next_active.end());

  DecanterState next = state;
  next.active = next_active;
  next.bin.clear();
  const auto all = state.full_set();
  std::set_difference(all.begin(), all.end(), next_active.begin(), next_active.end(),
                      std::back_inserter(next.bin));
  next.subset_size = next_size;
  next.epoch = state.epoch + 1;
  next.check_invariants();
  return next;
}

DecanterState decant_update(const DecanterState& state, const std::vector<int>& ranked,
                            RngStream& rng) {
  return decant_update(state, ranked, subset_size_at(state.schedule, state.epoch + 1), rng);
}

}  // namespace graphdec
