#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "graphdec/errors.hpp"

namespace graphdec {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// ---------------------------------------------------------------------------
// Randomness

/// Counter-based generator keyed by (seed, label). Draw i of a stream depends
/// only on the key and i, so substreams can be handed to workers in any order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  /// Independent child stream keyed by this stream's key and two indices
  /// (typically epoch and sample id).
  RngStream substream(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();

  /// k distinct indices from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  RngStream(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// scale/2 * (1 + cos(pi t / horizon)), evaluated as scale * sin^2(pi (horizon - t) / (2 horizon))
/// in extended precision so the tail near t = horizon keeps full relative accuracy.
double cosine_decay(double scale, int t, int horizon);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

// ---------------------------------------------------------------------------
// Optimizer and projection

template <typename DerivedP, typename DerivedG>
MatrixX<typename DerivedP::Scalar> sgd_step(const Eigen::MatrixBase<DerivedP>& params,
                                            const Eigen::MatrixBase<DerivedG>& grads,
                                            typename DerivedP::Scalar lr) {
  require(params.rows() == grads.rows() && params.cols() == grads.cols(),
          "sgd_step: params and grads differ in shape");
  require(lr > 0, "sgd_step: learning rate must be positive");
  return params - lr * grads;
}

/// Euclidean projection onto the ball of the given radius (Frobenius norm for matrices).
template <typename Derived>
MatrixX<typename Derived::Scalar> project_to_ball(const Eigen::MatrixBase<Derived>& params,
                                                  typename Derived::Scalar radius) {
  require(radius > 0, "project_to_ball: radius must be positive");
  const auto norm = params.norm();
  if (norm <= radius) return params;
  return params * (radius / norm);
}

/// Upper bound on the largest singular value. Frobenius norm.
template <typename Derived>
typename Derived::Scalar spectral_norm_upper_bound(const Eigen::MatrixBase<Derived>& m) {
  require(m.size() > 0, "spectral_norm_upper_bound: empty matrix");
  return m.norm();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Scales each row to unit L2 norm; zero rows stay zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& m) {
  MatrixX<typename Derived::Scalar> out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const auto n = out.row(r).norm();
    if (n > 0) out.row(r) /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite differences

struct GradReport {
  double max_relative_error = 0.0;
  std::pair<Eigen::Index, Eigen::Index> worst_coordinate{0, 0};
  double step = 0.0;
};

using LossFn = std::function<double(const Matrix&)>;

/// Central-difference check of analytic gradients. Relative error per
/// coordinate uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradReport finite_diff_check(const LossFn& loss_fn, const Matrix& params,
                             const Matrix& analytic_grads, double step);

}  // namespace graphdec
