#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shufflebench/numeric.hpp"
#include "shufflebench/ordering.hpp"
#include "shufflebench/problems.hpp"

namespace shufflebench {

// Squared norm of the windowed gradient-deviation sum
//   || sum_{t = start}^{start + j} (grad f_{i_t}(x) - grad f(x)) ||^2,
// accumulated pairwise. seq holds 1-based component indices.
double phi(const FiniteSumProblem& p, std::span<const int> seq,
           const Vector& x, long start, long j);

// Uniform gradient variance sup_x (1/n) sum_i ||grad f_i(x) - grad f(x)||^2,
// with the sup replaced by a max over the probe points (exact for quadratics,
// whose deviations do not depend on x).
double sigma_sgd_sq(const FiniteSumProblem& p,
                    std::span<const Vector> probe_points);

struct SigmaTauEstimate {
  double value = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal approximation at the maximizing j
  int num_samples = 0;
  long argmax_j = 0;
  bool exhaustive = false;
  bool deterministic_warning = false;  // deterministic strategy, samples > 1
};

// Empirical sequence-correlation estimate: samples num_orderings sequences of
// length tau from the strategy, averages phi per prefix length, and returns
// the max over prefixes and probe points.
//
//   - SGD / SS / RR are estimated unconditionally from window start 0 (their
//     chunk distributions are stationary across chunks up to epoch phase).
//   - Deterministic strategies (IG, SingleFunction, Explicit) have no
//     expectation to estimate; the max additionally runs over all window
//     start phases s in [0, n).
//   - Small cases are enumerated exactly instead of sampled: SS/RR when every
//     permutation tuple fits the enumeration budget (n <= 6), SGD when
//     n <= 6 and tau <= 8.
SigmaTauEstimate estimate_sigma_tau(const FiniteSumProblem& p,
                                    const OrderingStrategy& strategy, long tau,
                                    std::span<const Vector> probe_points,
                                    int num_orderings, std::uint64_t seed);

// estimate_sigma_tau with tau = n (one epoch).
SigmaTauEstimate sigma_epoch_sq(const FiniteSumProblem& p,
                                const OrderingStrategy& strategy,
                                std::span<const Vector> probe_points,
                                int num_orderings, std::uint64_t seed);

struct VarianceProfile {
  std::vector<long> taus;
  std::vector<double> sigma_hat_sq;
  std::vector<double> ci_halfwidth;
  std::vector<int> num_samples;
  std::string strategy_id;
  bool exhaustive = false;
  bool deterministic_warning = false;
};

// Per-tau estimates sharing one set of sampled sequences, so the profile is a
// running max over prefixes and non-decreasing in tau by construction.
// tau_list must be sorted ascending.
VarianceProfile variance_profile(const FiniteSumProblem& p,
                                 const OrderingStrategy& strategy,
                                 std::span<const long> tau_list,
                                 std::span<const Vector> probe_points,
                                 int num_orderings, std::uint64_t seed);

}  // namespace shufflebench
