#include "graphdec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace graphdec {

EvalReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels,
                           int class_count) {
  require(preds.size() == labels.size(), "compute_metrics: length mismatch");
  require(!preds.empty(), "compute_metrics: empty input");
  require(class_count >= 1, "compute_metrics: class_count must be positive");
  EvalReport r;
  r.confusion.assign(static_cast<std::size_t>(class_count),
                     std::vector<int>(static_cast<std::size_t>(class_count), 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < class_count && preds[i] >= 0 && preds[i] < class_count,
            "compute_metrics: class id out of range");
    ++r.confusion[labels[i]][preds[i]];
  }
  const double n = static_cast<double>(preds.size());
  long correct = 0;
  double recall_sum = 0.0;
  int classes_present = 0;
  r.per_class_f1.assign(static_cast<std::size_t>(class_count), 0.0);
  for (int c = 0; c < class_count; ++c) {
    const long tp = r.confusion[c][c];
    long actual = 0, predicted = 0;
    for (int k = 0; k < class_count; ++k) {
      actual += r.confusion[c][k];
      predicted += r.confusion[k][c];
    }
    correct += tp;
    if (actual > 0) {
      recall_sum += static_cast<double>(tp) / static_cast<double>(actual);
      ++classes_present;
    }
    const long denom = actual + predicted;
    r.per_class_f1[c] = denom > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  }
  r.accuracy = static_cast<double>(correct) / n;
  // Classes absent from the labels have undefined recall and are skipped.
  r.balanced_accuracy = classes_present > 0 ? recall_sum / classes_present : 0.0;
  double f1_sum = 0.0;
  for (double f : r.per_class_f1) f1_sum += f;
  r.f1_macro = f1_sum / class_count;
  // single-label: micro precision = micro recall = accuracy
  r.f1_micro = r.accuracy;
  return r;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double top = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - top).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

LinearProbe::LinearProbe(const Matrix& features, const std::vector<int>& labels, int class_count,
                         const ProbeConfig& cfg) {
  require(features.rows() == static_cast<Eigen::Index>(labels.size()),
          "linear_probe: embedding rows must align with labels");
  require(features.rows() > 0, "linear_probe: no training samples");
  require(cfg.epochs >= 1 && cfg.learning_rate > 0 && cfg.l2 >= 0, "linear_probe: bad config");
  const std::set<int> distinct(labels.begin(), labels.end());
  require(distinct.size() >= 2, "linear_probe: training labels contain a single class");

  const Eigen::Index n = features.rows();
  Matrix onehot = Matrix::Zero(n, class_count);
  std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(labels[i] >= 0 && labels[i] < class_count, "linear_probe: label out of range");
    onehot(i, labels[i]) = 1.0;
    ++counts[labels[i]];
  }
  Vector sample_weight = Vector::Constant(n, 1.0 / static_cast<double>(n));
  if (cfg.balanced) {
    const double present = static_cast<double>(distinct.size());
    for (Eigen::Index i = 0; i < n; ++i) sample_weight[i] = 1.0 / (present * counts[labels[i]]);
  }

  weights_ = Matrix::Zero(features.cols(), class_count);
  bias_ = Vector::Zero(class_count);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix p = softmax_rows(logits(features));
    const Matrix dlogits = (p - onehot).array().colwise() * sample_weight.array();
    const Matrix dw = features.transpose() * dlogits + cfg.l2 * weights_;
    const Vector db = dlogits.colwise().sum().transpose();
    weights_ -= cfg.learning_rate * dw;
    bias_ -= cfg.learning_rate * db;
  }
}

Matrix LinearProbe::logits(const Matrix& features) const {
  Matrix z = features * weights_;
  z.rowwise() += bias_.transpose();
  return z;
}

std::vector<int> LinearProbe::predict(const Matrix& features) const {
  const Matrix z = logits(features);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index best = 0;
    z.row(r).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

EvalReport linear_probe(const Matrix& train_x, const std::vector<int>& train_y,
                        const Matrix& test_x, const std::vector<int>& test_y, int class_count,
                        const ProbeConfig& cfg) {
  require(test_x.rows() == static_cast<Eigen::Index>(test_y.size()),
          "linear_probe: test rows must align with labels");
  const LinearProbe probe(train_x, train_y, class_count, cfg);
  return compute_metrics(probe.predict(test_x), test_y, class_count);
}

}  // namespace graphdec
