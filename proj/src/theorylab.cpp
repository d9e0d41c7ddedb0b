#include "graphdec/theorylab.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "graphdec/decanter.hpp"

namespace graphdec {

std::string to_string(ObjectiveFamily f) {
  return f == ObjectiveFamily::quadratic ? "quadratic" : "logistic";
}

std::string to_string(SubsetPolicy p) {
  switch (p) {
    case SubsetPolicy::full: return "full";
    case SubsetPolicy::random_k: return "random_k";
    case SubsetPolicy::diet_static: return "diet_static";
    case SubsetPolicy::decant_dynamic: return "decant_dynamic";
    case SubsetPolicy::adversarial: return "adversarial";
  }
  return "unknown";
}

SubsetPolicy subset_policy_from_string(const std::string& name) {
  for (auto p : {SubsetPolicy::full, SubsetPolicy::random_k, SubsetPolicy::diet_static,
                 SubsetPolicy::decant_dynamic, SubsetPolicy::adversarial})
    if (to_string(p) == name) return p;
  throw ConfigError("unknown policy '" + name + "'");
}

namespace {

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// Largest eigenvalue of a symmetric PSD matrix.
double top_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double smoothness(const TheoremInstance& inst) {
  Matrix h = Matrix::Zero(inst.dim, inst.dim);
  if (inst.family == ObjectiveFamily::quadratic) {
    for (const auto& a : inst.a) h += a.transpose() * a;
    return top_eigenvalue(h);
  }
  h = inst.x.transpose() * inst.x;
  return top_eigenvalue(h) / 4.0;
}

void finish_instance(TheoremInstance& inst, double radius, int horizon) {
  require(radius > 0, "theorem instance: radius must be positive");
  require(horizon >= 1, "theorem instance: horizon must be >= 1");
  require(inst.n >= 1 && inst.dim >= 1, "theorem instance: need n, dim >= 1");
  inst.radius = radius;
  inst.horizon = horizon;
  const double r = inst.feasible_radius();
  double sigma = 0.0;
  if (inst.family == ObjectiveFamily::quadratic) {
    // ||A^T (A theta - b)|| <= ||A|| (||A|| r + ||b||) on ||theta|| <= r.
    for (int i = 0; i < inst.n; ++i) {
      const double s = spectral_norm_upper_bound(inst.a[i]);
      sigma += s * (s * r + inst.b[i].norm());
    }
  } else {
    for (int i = 0; i < inst.n; ++i) sigma += inst.x.row(i).norm();
  }
  // A degenerate instance with zero gradients everywhere still needs a step size.
  inst.sigma = sigma > 0 ? sigma : 1.0;
  inst.learning_rate = radius / (inst.sigma * std::sqrt(static_cast<double>(horizon)));
  inst.theta_star = solve_reference_optimum(inst);
  inst.loss_star = inst.loss(inst.theta_star);
}

}  // namespace

double TheoremInstance::sample_loss(int i, const Vector& theta) const {
  if (family == ObjectiveFamily::quadratic) return 0.5 * (a[i] * theta - b[i]).squaredNorm();
  return softplus_neg(y(i) * x.row(i).dot(theta));
}

Vector TheoremInstance::sample_grad(int i, const Vector& theta) const {
  if (family == ObjectiveFamily::quadratic) return a[i].transpose() * (a[i] * theta - b[i]);
  const double m = y(i) * x.row(i).dot(theta);
  return (-y(i) * sigmoid(-m)) * x.row(i).transpose();
}

double TheoremInstance::loss(const Vector& theta) const {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += sample_loss(i, theta);
  return total;
}

Vector TheoremInstance::subset_grad(const std::vector<int>& ids, const Vector& theta) const {
  Vector g = Vector::Zero(dim);
  for (int i : ids) g += sample_grad(i, theta);
  return g;
}

Vector TheoremInstance::grad(const Vector& theta) const {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  return subset_grad(all, theta);
}

Vector solve_reference_optimum(const TheoremInstance& inst, double tol, int max_iterations) {
  const double lip = smoothness(inst);
  const double r = inst.feasible_radius();
  Vector theta = Vector::Zero(inst.dim);
  if (!(lip > 0)) return theta;
  const double step = 1.0 / lip;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector next = project_to_ball(theta - step * inst.grad(theta), r);
    const double residual = (next - theta).norm() / step;
    theta = next;
    if (residual <= tol) return theta;
  }
  throw ContractViolation("reference optimum: projected gradient descent did not converge");
}

TheoremInstance make_quadratic_instance(std::vector<Matrix> a, std::vector<Vector> b,
                                        double radius, int horizon) {
  require(!a.empty() && a.size() == b.size(), "quadratic instance: need matching A_i and b_i");
  TheoremInstance inst;
  inst.family = ObjectiveFamily::quadratic;
  inst.n = static_cast<int>(a.size());
  inst.dim = static_cast<int>(a.front().cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    require(a[i].cols() == inst.dim && a[i].rows() == b[i].size(),
            "quadratic instance: inconsistent shapes at sample " + std::to_string(i));
  inst.a = std::move(a);
  inst.b = std::move(b);
  finish_instance(inst, radius, horizon);
  return inst;
}

TheoremInstance make_logistic_instance(Matrix x, Vector y, double radius, int horizon) {
  require(x.rows() >= 1 && x.rows() == y.size(), "logistic instance: rows of x must match y");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    require(y(i) == 1.0 || y(i) == -1.0, "logistic instance: labels must be +1 or -1");
  TheoremInstance inst;
  inst.family = ObjectiveFamily::logistic;
  inst.n = static_cast<int>(x.rows());
  inst.dim = static_cast<int>(x.cols());
  inst.x = std::move(x);
  inst.y = std::move(y);
  finish_instance(inst, radius, horizon);
  return inst;
}

TheoremInstance build_instance(ObjectiveFamily family, int n, int dim, std::uint64_t seed,
                               double radius, int horizon) {
  require(n >= 1 && dim >= 1, "build_instance: n and dim must be >= 1");
  require(radius > 0, "build_instance: radius must be positive");
  RngStream rng(seed, "generate");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Vector truth(dim);
  for (int j = 0; j < dim; ++j) truth(j) = rng.normal();
  if (family == ObjectiveFamily::quadratic) {
    truth *= radius / 4.0 / std::max(truth.norm(), 1e-12) * rng.uniform();
    std::vector<Matrix> a;
    std::vector<Vector> b;
    for (int i = 0; i < n; ++i) {
      Matrix ai(2, dim);
      for (Eigen::Index k = 0; k < ai.size(); ++k) ai.data()[k] = scale * rng.normal();
      Vector bi = ai * truth;
      for (Eigen::Index k = 0; k < bi.size(); ++k) bi(k) += 0.1 * rng.normal();
      a.push_back(std::move(ai));
      b.push_back(std::move(bi));
    }
    return make_quadratic_instance(std::move(a), std::move(b), radius, horizon);
  }
  Matrix x(n, dim);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = rng.normal();
    const double side = x.row(i).dot(truth) >= 0 ? 1.0 : -1.0;
    y(i) = rng.uniform() < 0.1 ? -side : side;
  }
  return make_logistic_instance(std::move(x), std::move(y), radius, horizon);
}

namespace {

std::vector<int> rank_by_grad_norm(const TheoremInstance& inst, const std::vector<int>& ids,
                                   const Vector& theta) {
  std::vector<ScoredSample> scored;
  for (int i : ids) scored.push_back({i, inst.sample_grad(i, theta).norm(), 0.0});
  std::vector<int> ranked;
  for (const auto& s : normalize_and_rank(scored)) ranked.push_back(s.id);
  return ranked;
}

}  // namespace

Trajectory run_policy(const TheoremInstance& inst, SubsetPolicy policy,
                      const PolicyParams& params, std::uint64_t seed) {
  const int n = inst.n;
  const int T = inst.horizon;
  const int k = params.k < 0 ? std::max(1, n / 2) : params.k;
  require(k >= 1 && k <= n, "run_policy: k must be in [1, n]");
  const double r = inst.feasible_radius();

  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);

  Trajectory traj;
  {
    RngStream init(seed, "init");
    Vector theta0(inst.dim);
    for (int j = 0; j < inst.dim; ++j) theta0(j) = init.normal();
    const double norm = theta0.norm();
    theta0 *= norm > 0 ? r * init.uniform() / norm : 0.0;
    traj.thetas.push_back(theta0);
  }

  std::vector<int> static_subset;
  if (policy == SubsetPolicy::diet_static) {
    auto ranked = rank_by_grad_norm(inst, all, traj.thetas.front());
    static_subset.assign(ranked.begin(), ranked.begin() + k);
    std::sort(static_subset.begin(), static_subset.end());
  }
  DecanterSchedule sched{n, T, DecanterSchedule::default_min_size(n)};
  DecanterState state = initial_decanter_state(all, sched, params.epsilon);
  const RngStream select(seed, "policy");
  const RngStream recycle(seed, "recycle");

  for (int t = 0; t < T; ++t) {
    const Vector& theta = traj.thetas.back();
    std::vector<int> subset;
    switch (policy) {
      case SubsetPolicy::full: subset = all; break;
      case SubsetPolicy::random_k: {
        RngStream rng = select.substream(static_cast<std::uint64_t>(t));
        subset = rng.sample_without_replacement(n, k);
        std::sort(subset.begin(), subset.end());
        break;
      }
      case SubsetPolicy::diet_static: subset = static_subset; break;
      case SubsetPolicy::decant_dynamic: subset = state.active; break;
      case SubsetPolicy::adversarial: {
        const Vector full = inst.grad(theta);
        int worst = 0;
        double lowest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
          const double dot = inst.sample_grad(i, theta).dot(full);
          if (dot < lowest) {
            lowest = dot;
            worst = i;
          }
        }
        subset = {worst};
        break;
      }
    }
    // Same summation order for both sums, so the full policy gives exactly 0.
    const Vector g_subset = inst.subset_grad(subset, theta);
    const Vector g_full = inst.subset_grad(all, theta);
    traj.errors.push_back((g_subset - g_full).norm());
    traj.losses.push_back(inst.loss(theta));

    if (policy == SubsetPolicy::decant_dynamic && t + 1 < T) {
      RngStream rng = recycle.substream(static_cast<std::uint64_t>(t));
      state = decant_update(state, rank_by_grad_norm(inst, state.active, theta),
                            subset_size_at(sched, t + 1), rng);
    }
    traj.subsets.push_back(std::move(subset));
    traj.thetas.push_back(project_to_ball(theta - inst.learning_rate * g_subset, r));
  }
  traj.losses.push_back(inst.loss(traj.thetas.back()));
  return traj;
}

BoundReport check_bound(const TheoremInstance& inst, const Trajectory& traj) {
  const auto T = static_cast<int>(traj.errors.size());
  require(T >= 1, "check_bound: empty trajectory");
  require(traj.losses.size() >= static_cast<std::size_t>(T), "check_bound: missing losses");
  BoundReport rep;
  double min_loss = std::numeric_limits<double>::infinity();
  for (int t = 0; t < T; ++t) min_loss = std::min(min_loss, traj.losses[t]);
  rep.lhs = min_loss - inst.loss_star;
  const double err_sum = std::accumulate(traj.errors.begin(), traj.errors.end(), 0.0);
  rep.mean_error = err_sum / T;
  rep.rhs = inst.radius * inst.sigma / std::sqrt(static_cast<double>(T)) +
            inst.radius / T * err_sum;
  for (const auto& th : traj.thetas)
    rep.max_distance = std::max(rep.max_distance, (th - inst.theta_star).norm());
  rep.holds = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

std::vector<TheoremRow> run_theorem_suite(const TheoremSuiteSpec& spec) {
  require(spec.instances >= 0, "theorem suite: negative instance count");
  const std::size_t per_instance = spec.policies.size() * spec.seeds.size();
  std::vector<TheoremRow> rows(static_cast<std::size_t>(spec.instances) * per_instance);
  const RngStream root(spec.base_seed, "generate");

  auto job = [&](int id) {
    RngStream pick = root.substream(static_cast<std::uint64_t>(id));
    const auto family = id % 2 == 0 ? ObjectiveFamily::quadratic : ObjectiveFamily::logistic;
    const int n = 10 + static_cast<int>(pick.uniform_int(41));
    const int dim = 2 + static_cast<int>(pick.uniform_int(5));
    const double radius = 1.0 + 4.0 * pick.uniform();
    const auto inst = build_instance(family, n, dim, pick.next_u64(), radius, spec.horizon);
    std::size_t slot = static_cast<std::size_t>(id) * per_instance;
    for (auto policy : spec.policies)
      for (auto seed : spec.seeds) {
        const auto traj = run_policy(inst, policy, {}, seed);
        TheoremRow& row = rows[slot++];
        row.instance = id;
        row.family = family;
        row.policy = policy;
        row.seed = seed;
        row.report = check_bound(inst, traj);
        if (policy == SubsetPolicy::full)
          row.full_error_exact =
              std::all_of(traj.errors.begin(), traj.errors.end(), [](double e) { return e == 0.0; });
      }
  };

  const int workers = std::max(1, std::min(spec.workers, spec.instances));
  if (workers == 1) {
    for (int id = 0; id < spec.instances; ++id) job(id);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int id = w; id < spec.instances; id += workers) job(id);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  return rows;
}

}  // namespace graphdec
