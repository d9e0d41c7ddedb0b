#include "graphdec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace graphdec {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : key_(mix64(mix64(seed) ^ fnv1a64(label))) {}

RngStream RngStream::substream(std::uint64_t a, std::uint64_t b) const {
  const std::uint64_t k = mix64(key_ ^ mix64(a + 0x632be59bd9b4e019ULL) ^ mix64(mix64(b) + 1));
  return RngStream(k, 0, 0);
}

std::uint64_t RngStream::next_u64() {
  // Two rounds over (key, counter) keep nearby counters decorrelated.
  const std::uint64_t c = counter_++;
  return mix64(mix64(key_ ^ c) + c);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  require(n > 0, "uniform_int: empty range");
  // Rejection on the top of the range removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double RngStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> RngStream::sample_without_replacement(int n, int k) {
  require(n >= 0 && k >= 0 && k <= n, "sample_without_replacement: k out of range");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

GradReport finite_diff_check(const LossFn& loss_fn, const Matrix& params,
                             const Matrix& analytic_grads, double step) {
  require(step > 0, "finite_diff_check: step must be positive");
  require(params.rows() == analytic_grads.rows() && params.cols() == analytic_grads.cols(),
          "finite_diff_check: gradient shape mismatch");
  GradReport report;
  report.step = step;
  Matrix probe = params;
  for (Eigen::Index c = 0; c < params.cols(); ++c) {
    for (Eigen::Index r = 0; r < params.rows(); ++r) {
      const double orig = probe(r, c);
      probe(r, c) = orig + step;
      const double up = loss_fn(probe);
      probe(r, c) = orig - step;
      const double down = loss_fn(probe);
      probe(r, c) = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        std::ostringstream msg;
        msg << "finite_diff_check: non-finite loss when perturbing coordinate (" << r << ", " << c
            << ")";
        throw ContractViolation(msg.str());
      }
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = analytic_grads(r, c);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_coordinate = {r, c};
      }
    }
  }
  return report;
}

double cosine_decay(double scale, int t, int horizon) {
  require(horizon >= 1, "cosine_decay: horizon must be >= 1");
  const long double half_angle =
      std::numbers::pi_v<long double> * (horizon - t) / (2.0L * horizon);
  const long double s = std::sin(half_angle);
  return static_cast<double>(static_cast<long double>(scale) * s * s);
}

}  // namespace graphdec
