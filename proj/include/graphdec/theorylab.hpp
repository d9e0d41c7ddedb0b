#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphdec/numerics.hpp"

namespace graphdec {

enum class ObjectiveFamily { quadratic, logistic };

std::string to_string(ObjectiveFamily f);

/// A convex finite-sum objective L = sum_i L_i on the ball ||theta|| <= d/2.
///
/// quadratic: L_i = 1/2 ||A_i theta - b_i||^2
/// logistic:  L_i = log(1 + exp(-y_i <x_i, theta>)), y_i in {-1, +1}
struct TheoremInstance {
  ObjectiveFamily family = ObjectiveFamily::quadratic;
  int n = 0;
  int dim = 0;
  double radius = 1.0;  // d
  double sigma = 0.0;   // bound on the norm of any subset gradient sum over the ball
  int horizon = 1;      // T
  double learning_rate = 0.0;

  std::vector<Matrix> a;  // quadratic
  std::vector<Vector> b;
  Matrix x;               // logistic, one row per sample
  Vector y;

  Vector theta_star;
  double loss_star = 0.0;

  double sample_loss(int i, const Vector& theta) const;
  Vector sample_grad(int i, const Vector& theta) const;
  /// Sum over samples in ascending order.
  double loss(const Vector& theta) const;
  Vector grad(const Vector& theta) const;
  /// Sum over `ids` in the given order.
  Vector subset_grad(const std::vector<int>& ids, const Vector& theta) const;
  double feasible_radius() const { return radius / 2; }
};

/// Fills sigma, learning rate and the reference optimum.
TheoremInstance make_quadratic_instance(std::vector<Matrix> a, std::vector<Vector> b,
                                        double radius, int horizon);
TheoremInstance make_logistic_instance(Matrix x, Vector y, double radius, int horizon);

/// Random instance of the given family.
TheoremInstance build_instance(ObjectiveFamily family, int n, int dim, std::uint64_t seed,
                               double radius, int horizon);

/// Projected gradient descent to a fixed-point residual <= tol. Throws on non-convergence.
Vector solve_reference_optimum(const TheoremInstance& inst, double tol = 1e-10,
                               int max_iterations = 2'000'000);

enum class SubsetPolicy { full, random_k, diet_static, decant_dynamic, adversarial };

std::string to_string(SubsetPolicy p);
SubsetPolicy subset_policy_from_string(const std::string& name);

struct PolicyParams {
  int k = -1;                // random_k / diet_static subset size, < 0: n / 2
  double epsilon = 0.1;      // decant_dynamic recycle rate
};

struct Trajectory {
  std::vector<Vector> thetas;             // theta(0) .. theta(T)
  std::vector<double> losses;             // L(theta(t)), t = 0..T
  std::vector<double> errors;             // Err(t), t = 0..T-1
  std::vector<std::vector<int>> subsets;  // D_S(t), t = 0..T-1
};

/// theta(t+1) = project(theta(t) - alpha * sum_{i in D_S(t)} grad L_i(theta(t))).
Trajectory run_policy(const TheoremInstance& inst, SubsetPolicy policy,
                      const PolicyParams& params, std::uint64_t seed);

struct BoundReport {
  double lhs = 0.0;  // min_{t < T} L(theta(t)) - L(theta*)
  double rhs = 0.0;  // d sigma / sqrt(T) + d / T * sum_t Err(t)
  double mean_error = 0.0;
  double max_distance = 0.0;  // max_t ||theta(t) - theta*||
  bool holds = false;
};

BoundReport check_bound(const TheoremInstance& inst, const Trajectory& traj);

struct TheoremRow {
  int instance = 0;
  ObjectiveFamily family = ObjectiveFamily::quadratic;
  SubsetPolicy policy = SubsetPolicy::full;
  std::uint64_t seed = 0;
  BoundReport report;
  bool full_error_exact = true;  // every Err(t) == 0 for the full policy
};

struct TheoremSuiteSpec {
  int instances = 100;
  std::vector<SubsetPolicy> policies{SubsetPolicy::full, SubsetPolicy::random_k,
                                     SubsetPolicy::diet_static, SubsetPolicy::decant_dynamic};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int horizon = 50;
  std::uint64_t base_seed = 0;
  int workers = 1;
};

/// Alternates quadratic and logistic instances; rows ordered by instance, policy, seed.
std::vector<TheoremRow> run_theorem_suite(const TheoremSuiteSpec& spec);

}  // namespace graphdec
