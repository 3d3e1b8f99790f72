#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "shufflebench/engine.hpp"
#include "shufflebench/numeric.hpp"
#include "shufflebench/ordering.hpp"
#include "shufflebench/problems.hpp"

namespace shufflebench {

// Admissible stepsize bound and the matching correlation window:
// gamma <= 1/(8 sqrt(3) L) and tau = floor(1/(8 sqrt(3) L gamma)) >= 1.
double max_admissible_gamma(double smoothness);
long tau_from_stepsize(double smoothness, double gamma);

// Convergence-rate bound with the explicit constants from the analysis:
//   (1/(T+1)) sum_t ||grad f(x_t)||^2 <= 4 F0 / (gamma (T+1))
//                                        + 4 * 2633 * L^2 gamma^2 sigma_tau^2.
struct RateBound {
  double opt_term = 0.0;
  double noise_term = 0.0;
  double gamma = 0.0;
  long tau = 0;

  static constexpr double kOptCoeff = 4.0;
  static constexpr double kNoiseNumericalConstant = 2633.0;  // A
  static constexpr double kNoiseCoeff = kOptCoeff * kNoiseNumericalConstant;

  double total() const { return opt_term + noise_term; }
};

RateBound theorem_rate_bound(double f0, double gamma, long T, double smoothness,
                             double sigma_tau_sq);

// Closed-form sigma_tau^2 bounds per strategy:
//   with replacement        tau * sigma_sgd^2
//   random reshuffle        4 min{tau, n} n sigma_sgd^2
//   incremental / shuffle   min{tau, n} n sigma_sgd^2
//   single function         tau^2 sigma_1^2
// Explicit sequences have no closed form; use the empirical estimator.
double sigma_tau_bound(OrderingKind kind, long tau, int n, double sigma_sgd_sq,
                       double sigma_one_sq = 0.0);

struct CheckRow {
  long t = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  double max_ratio = 0.0;
  long argmax_t = 0;
  bool passed = false;

  // (t, lhs, rhs, ratio) rows plus a summary comment line.
  void write_csv(std::ostream& out) const;
};

// Deterministic per-trajectory check of the chunked deviation inequality: for
// every t,
//   || sum_{j=r(t)}^{t} (grad f(x_j) - grad f_{i_j}(x_j)) ||^2
//     <= 3 phi_t(x_{r(t)}) + 48 gamma^2 L^2 tau sum_j phi_j(x_{r(t)})
//        + 16 gamma^2 tau^3 L^2 sum_j ||grad f(x_j)||^2,
// with r(t) = floor(t/tau) tau and phi evaluated at the chunk-start iterate.
// Requires tau == tau_from_stepsize(L, gamma).
CheckReport lemma_consensus_check(const Trajectory& traj,
                                  const FiniteSumProblem& p, double gamma,
                                  long tau);

// Average squared full-gradient norm over the iterates x_0 .. x_T (replayed).
double mean_squared_grad_norm(const Trajectory& traj,
                              const FiniteSumProblem& p);

// Realized-trajectory form of the final descent bound, with sigma_tau^2
// replaced by a closed-form (or empirical) upper bound:
//   (1/(T+1)) sum_t ||grad f(x_t)||^2 <= 4 F0/(gamma (T+1))
//                                        + 4 A L^2 gamma^2 sigma_tau_sq_bound.
// Valid per-trajectory for orders whose sigma bound holds pointwise
// (incremental, shuffle, reshuffle, single-function, explicit); for
// with-replacement sampling assert it on a seed aggregate instead.
CheckReport descent_bound_check(const Trajectory& traj,
                                const FiniteSumProblem& p, double gamma,
                                double sigma_tau_sq_bound, double f_star);

// Mean-over-seeds variant: compares the average of the per-trajectory LHS
// against the same bound.
CheckReport descent_bound_aggregate(std::span<const Trajectory> trajs,
                                    const FiniteSumProblem& p, double gamma,
                                    double sigma_tau_sq_bound, double f_star);

// f* for F0 = f(x0) - f*: closed form for quadratics (solve A x = b),
// otherwise a full-gradient-descent reference run to grad_tol (returns the
// best value seen if the budget runs out, e.g. on separable logistic data).
double reference_minimum(const FiniteSumProblem& p, double grad_tol = 1e-8,
                         long max_iters = 200000);

}  // namespace shufflebench
