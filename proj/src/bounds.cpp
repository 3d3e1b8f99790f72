#include "shufflebench/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "shufflebench/errors.hpp"

namespace shufflebench {

namespace {

constexpr double kEightSqrtThree = 13.856406460551018;  // 8 sqrt(3)
constexpr double kRatioTol = 1e-9;

// Absorbs the last-bit rounding of 1/(8 sqrt(3) L gamma) so that boundary
// stepsizes like gamma = 1/(8 sqrt(3) L) land on the intended integer.
constexpr double kFloorSlack = 1e-9;

}  // namespace

double max_admissible_gamma(double smoothness) {
  if (smoothness <= 0.0) {
    throw parameter_error("max_admissible_gamma: L must be > 0");
  }
  return 1.0 / (kEightSqrtThree * smoothness);
}

long tau_from_stepsize(double smoothness, double gamma) {
  if (smoothness <= 0.0) {
    throw parameter_error("tau_from_stepsize: L must be > 0");
  }
  if (gamma <= 0.0) {
    throw parameter_error("tau_from_stepsize: gamma must be > 0");
  }
  const double v = 1.0 / (kEightSqrtThree * smoothness * gamma);
  if (v < 1.0 - kFloorSlack) {
    throw parameter_error(
        "tau_from_stepsize: gamma exceeds the admissible range (0, 1/(8*sqrt(3)*L)] = (0, " +
        std::to_string(max_admissible_gamma(smoothness)) + "]");
  }
  return static_cast<long>(std::floor(v * (1.0 + kFloorSlack)));
}

RateBound theorem_rate_bound(double f0, double gamma, long T, double smoothness,
                             double sigma_tau_sq) {
  if (f0 < 0.0) throw parameter_error("theorem_rate_bound: F0 must be >= 0");
  if (T < 1) throw parameter_error("theorem_rate_bound: T must be >= 1");
  if (sigma_tau_sq < 0.0) {
    throw parameter_error("theorem_rate_bound: sigma_tau_sq must be >= 0");
  }
  RateBound b;
  b.gamma = gamma;
  b.tau = tau_from_stepsize(smoothness, gamma);
  b.opt_term =
      RateBound::kOptCoeff * f0 / (gamma * static_cast<double>(T + 1));
  b.noise_term = RateBound::kNoiseCoeff * smoothness * smoothness * gamma *
                 gamma * sigma_tau_sq;
  return b;
}

double sigma_tau_bound(OrderingKind kind, long tau, int n, double sigma_sgd_sq,
                       double sigma_one_sq) {
  if (tau < 1) throw parameter_error("sigma_tau_bound: tau must be >= 1");
  if (n < 1) throw parameter_error("sigma_tau_bound: n must be >= 1");
  const double capped = static_cast<double>(std::min(tau, static_cast<long>(n)));
  switch (kind) {
    case OrderingKind::WithReplacement:
      return static_cast<double>(tau) * sigma_sgd_sq;
    case OrderingKind::RandomReshuffle:
      return 4.0 * capped * static_cast<double>(n) * sigma_sgd_sq;
    case OrderingKind::Incremental:
    case OrderingKind::SingleShuffle:
      return capped * static_cast<double>(n) * sigma_sgd_sq;
    case OrderingKind::SingleFunction:
      return static_cast<double>(tau) * static_cast<double>(tau) * sigma_one_sq;
    case OrderingKind::Explicit:
      throw parameter_error(
          "sigma_tau_bound: no closed form for explicit sequences; use "
          "estimate_sigma_tau");
  }
  throw parameter_error("sigma_tau_bound: unknown strategy kind");
}

void CheckReport::write_csv(std::ostream& out) const {
  out << "# max_ratio=" << max_ratio << " argmax_t=" << argmax_t
      << " passed=" << (passed ? 1 : 0) << "\n";
  out << "t,lhs,rhs,ratio\n";
  for (const auto& row : rows) {
    out << row.t << ',' << row.lhs << ',' << row.rhs << ',' << row.ratio
        << "\n";
  }
}

CheckReport lemma_consensus_check(const Trajectory& traj,
                                  const FiniteSumProblem& p, double gamma,
                                  long tau) {
  const double L = p.smoothness();
  if (tau != tau_from_stepsize(L, gamma)) {
    throw parameter_error(
        "lemma_consensus_check: tau does not match tau_from_stepsize(L, gamma)");
  }
  if (gamma != traj.gamma) {
    throw parameter_error("lemma_consensus_check: gamma does not match trajectory");
  }

  CheckReport report;
  report.rows.reserve(static_cast<std::size_t>(traj.T) + 1);
  const double eps = std::numeric_limits<double>::epsilon();

  // Chunk state, rebuilt whenever t crosses a multiple of tau.
  Vector chunk_start;                 // x_{r(t)}
  std::vector<Vector> dev_at_start;   // grad f_i - grad f at x_{r(t)}
  Vector dev_prefix;                  // prefix of dev_at_start over the chunk
  Vector lhs_prefix;                  // prefix of grad f(x_j) - grad f_{i_j}(x_j)
  double phi_sum = 0.0;               // sum of phi_j(x_{r(t)}) over the chunk
  double grad_sq_sum = 0.0;           // sum of ||grad f(x_j)||^2

  Vector comp_grad(p.dimension());
  const double lhs_coeff = 48.0 * gamma * gamma * L * L * static_cast<double>(tau);
  const double grad_coeff = 16.0 * gamma * gamma * L * L *
                            static_cast<double>(tau) * static_cast<double>(tau) *
                            static_cast<double>(tau);

  replay(p, traj, [&](long t, const Vector& x, int index) {
    if (t % tau == 0) {
      chunk_start = x;
      const Vector g_full_start = p.full_gradient(x);
      dev_at_start.clear();
      Vector g(p.dimension());
      for (int i = 1; i <= p.num_components(); ++i) {
        p.component_gradient(i, x, g);
        dev_at_start.push_back(g - g_full_start);
      }
      dev_prefix = Vector::Zero(p.dimension());
      lhs_prefix = Vector::Zero(p.dimension());
      phi_sum = 0.0;
      grad_sq_sum = 0.0;
    }

    const Vector g_full = p.full_gradient(x);
    p.component_gradient(index, x, comp_grad);

    lhs_prefix += g_full - comp_grad;
    dev_prefix -= dev_at_start[static_cast<std::size_t>(index - 1)];
    const double phi_t = dev_prefix.squaredNorm();
    phi_sum += phi_t;
    grad_sq_sum += g_full.squaredNorm();

    CheckRow row;
    row.t = t;
    row.lhs = lhs_prefix.squaredNorm();
    row.rhs = 3.0 * phi_t + lhs_coeff * phi_sum + grad_coeff * grad_sq_sum;
    row.ratio = row.lhs / (row.rhs + eps);
    report.rows.push_back(row);
    if (row.ratio > report.max_ratio) {
      report.max_ratio = row.ratio;
      report.argmax_t = t;
    }
  });

  report.passed = report.max_ratio <= 1.0 + kRatioTol;
  return report;
}

double mean_squared_grad_norm(const Trajectory& traj,
                              const FiniteSumProblem& p) {
  PairwiseScalarSum sum;
  replay(p, traj, [&](long /*t*/, const Vector& x, int /*index*/) {
    sum.add(p.full_gradient(x).squaredNorm());
  });
  return sum.total() / static_cast<double>(traj.T + 1);
}

namespace {

CheckReport descent_report(double lhs, double f0, double gamma, long T,
                           double smoothness, double sigma_tau_sq_bound) {
  const RateBound bound =
      theorem_rate_bound(f0, gamma, T, smoothness, sigma_tau_sq_bound);
  CheckReport report;
  CheckRow row;
  row.t = T;
  row.lhs = lhs;
  row.rhs = bound.total();
  row.ratio = row.lhs / (row.rhs + std::numeric_limits<double>::epsilon());
  report.rows.push_back(row);
  report.max_ratio = row.ratio;
  report.argmax_t = T;
  report.passed = report.max_ratio <= 1.0 + kRatioTol;
  return report;
}

}  // namespace

CheckReport descent_bound_check(const Trajectory& traj,
                                const FiniteSumProblem& p, double gamma,
                                double sigma_tau_sq_bound, double f_star) {
  if (gamma != traj.gamma) {
    throw parameter_error("descent_bound_check: gamma does not match trajectory");
  }
  const double f0 = std::max(p.value(traj.x0) - f_star, 0.0);
  return descent_report(mean_squared_grad_norm(traj, p), f0, gamma, traj.T,
                        p.smoothness(), sigma_tau_sq_bound);
}

CheckReport descent_bound_aggregate(std::span<const Trajectory> trajs,
                                    const FiniteSumProblem& p, double gamma,
                                    double sigma_tau_sq_bound, double f_star) {
  if (trajs.empty()) {
    throw parameter_error("descent_bound_aggregate: no trajectories");
  }
  PairwiseScalarSum lhs_sum;
  const long T = trajs.front().T;
  for (const auto& traj : trajs) {
    if (traj.T != T || traj.gamma != gamma) {
      throw parameter_error(
          "descent_bound_aggregate: trajectories must share T and gamma");
    }
    lhs_sum.add(mean_squared_grad_norm(traj, p));
  }
  const double f0 = std::max(p.value(trajs.front().x0) - f_star, 0.0);
  const double lhs = lhs_sum.total() / static_cast<double>(trajs.size());
  return descent_report(lhs, f0, gamma, T, p.smoothness(), sigma_tau_sq_bound);
}

double reference_minimum(const FiniteSumProblem& p, double grad_tol,
                         long max_iters) {
  if (const auto* quad = dynamic_cast<const QuadraticProblem*>(&p)) {
    return quad->value(quad->minimizer());
  }
  // Full gradient descent at gamma = 1/L; tracks the best value in case the
  // infimum is not attained.
  const double L = p.smoothness();
  if (L <= 0.0) throw parameter_error("reference_minimum: L must be > 0");
  const double gamma = 1.0 / L;
  Vector x = Vector::Zero(p.dimension());
  double best = p.value(x);
  for (long it = 0; it < max_iters; ++it) {
    const Vector g = p.full_gradient(x);
    if (g.norm() <= grad_tol) break;
    x -= gamma * g;
    best = std::min(best, p.value(x));
  }
  return best;
}

}  // namespace shufflebench
