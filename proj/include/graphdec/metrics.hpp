#pragma once

#include <vector>

#include "graphdec/numerics.hpp"

namespace graphdec {

struct EvalReport {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::vector<int>> confusion;  // confusion[true][pred]
};

/// Per-class F1 with a zero denominator counts as 0.
EvalReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels,
                           int class_count);

struct ProbeConfig {
  int epochs = 500;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  /// Weight the loss by inverse class frequency.
  bool balanced = false;
};

/// Multinomial logistic regression (with bias) trained by full-batch gradient
/// descent on frozen embeddings.
class LinearProbe {
 public:
  LinearProbe(const Matrix& features, const std::vector<int>& labels, int class_count,
              const ProbeConfig& cfg);

  Matrix logits(const Matrix& features) const;
  std::vector<int> predict(const Matrix& features) const;

  const Matrix& weights() const { return weights_; }
  const Vector& bias() const { return bias_; }

 private:
  Matrix weights_;  // dim x classes
  Vector bias_;
};

EvalReport linear_probe(const Matrix& train_x, const std::vector<int>& train_y,
                        const Matrix& test_x, const std::vector<int>& test_y, int class_count,
                        const ProbeConfig& cfg);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace graphdec
