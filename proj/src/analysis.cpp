#include "graphdec/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace graphdec {

ScoreTraceMatrix score_trace_matrix(const std::vector<ScoreRecord>& records) {
  require(!records.empty(), "score_trace_matrix: no records");
  std::map<int, std::map<int, double>> by_epoch;
  for (const auto& r : records) by_epoch[r.epoch][r.sample_id] = r.normalized_score;

  const int last = by_epoch.rbegin()->first;
  for (int t = 1; t <= last; ++t)
    if (!by_epoch.count(t))
      throw ContractViolation("score_trace_matrix: epoch " + std::to_string(t) + " missing");
  const auto& first = by_epoch.begin()->second;
  for (const auto& [t, row] : by_epoch) {
    bool same = row.size() == first.size();
    for (auto a = row.begin(), b = first.begin(); same && a != row.end(); ++a, ++b)
      same = a->first == b->first;
    if (!same)
      throw ContractViolation("score_trace_matrix: epoch " + std::to_string(t) +
                              " covers a different sample set");
  }

  ScoreTraceMatrix m;
  for (const auto& [id, s] : first) m.sample_order.push_back(id);
  std::stable_sort(m.sample_order.begin(), m.sample_order.end(), [&](int a, int b) {
    return first.at(a) > first.at(b);
  });
  m.values.resize(static_cast<Eigen::Index>(by_epoch.size()),
                  static_cast<Eigen::Index>(m.sample_order.size()));
  Eigen::Index r = 0;
  for (const auto& [t, row] : by_epoch) {
    m.epochs.push_back(t);
    for (std::size_t c = 0; c < m.sample_order.size(); ++c)
      m.values(r, static_cast<Eigen::Index>(c)) = row.at(m.sample_order[c]);
    ++r;
  }
  return m;
}

std::vector<int> top_half(const ScoreTraceMatrix& m, Eigen::Index row) {
  std::vector<std::pair<double, int>> scored;
  for (Eigen::Index c = 0; c < m.values.cols(); ++c)
    if (m.values(row, c) >= 0) scored.emplace_back(m.values(row, c), m.sample_order[c]);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<int> ids;
  for (std::size_t i = 0; i < scored.size() / 2; ++i) ids.push_back(scored[i].second);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double mean_churn(const ScoreTraceMatrix& m, int lag) {
  require(lag >= 1, "mean_churn: lag must be >= 1");
  const Eigen::Index rows = m.values.rows();
  require(rows > lag, "mean_churn: trace shorter than the lag");
  double total = 0.0;
  for (Eigen::Index t = 0; t + lag < rows; ++t) {
    const auto a = top_half(m, t);
    const auto b = top_half(m, t + lag);
    std::vector<int> both, either;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(either));
    total += either.empty() ? 0.0 : 1.0 - static_cast<double>(both.size()) / either.size();
  }
  return total / static_cast<double>(rows - lag);
}

std::vector<int> bottom_to_top_promotions(const ScoreTraceMatrix& m) {
  require(m.values.rows() >= 1, "bottom_to_top_promotions: empty trace");
  const auto top0 = top_half(m, 0);
  std::set<int> bottom;
  for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
    const int id = m.sample_order[c];
    if (m.values(0, c) >= 0 && !std::binary_search(top0.begin(), top0.end(), id))
      bottom.insert(id);
  }
  std::set<int> promoted;
  for (Eigen::Index t = 1; t < m.values.rows(); ++t)
    for (int id : top_half(m, t))
      if (bottom.count(id)) promoted.insert(id);
  return {promoted.begin(), promoted.end()};
}

std::vector<SensitivityRow> minority_sensitivity(const std::vector<ScoreRecord>& records,
                                                 const GraphDataset& ds, int minority) {
  struct Acc {
    double minority = 0.0, majority = 0.0;
    int n_minority = 0, n_majority = 0;
  };
  std::map<int, Acc> acc;
  for (const auto& r : records) {
    auto& a = acc[r.epoch];
    if (r.normalized_score < 0) continue;
    if (ds.label_of(r.sample_id) == minority) {
      a.minority += r.normalized_score;
      ++a.n_minority;
    } else {
      a.majority += r.normalized_score;
      ++a.n_majority;
    }
  }
  std::vector<SensitivityRow> out;
  for (const auto& [t, a] : acc) {
    SensitivityRow row;
    row.epoch = t;
    if (a.n_minority > 0) row.minority_mean = a.minority / a.n_minority;
    if (a.n_majority > 0) row.majority_mean = a.majority / a.n_majority;
    out.push_back(row);
  }
  return out;
}

}  // namespace graphdec
