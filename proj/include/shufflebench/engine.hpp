#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "shufflebench/numeric.hpp"
#include "shufflebench/ordering.hpp"
#include "shufflebench/problems.hpp"

namespace shufflebench {

// What a run stores. Full-gradient norms are evaluated at t = 0 and then
// every eval_every steps (0 means once per epoch); iterates are stored either
// only at chunk boundaries t = 0 mod boundary_period (the default; anything
// else is replayed from the schedule), or all of them for small problems.
struct RecordPolicy {
  enum class Iterates { BoundariesOnly, Full };

  Iterates iterates = Iterates::BoundariesOnly;
  long boundary_period = 0;  // 0: only x_0 and x_T are kept
  long eval_every = 0;       // 0: once per epoch
  bool record_values = false;

  static RecordPolicy full(long eval_every = 0, bool record_values = false) {
    return {Iterates::Full, 0, eval_every, record_values};
  }
  static RecordPolicy per_epoch(bool record_values = false) {
    return {Iterates::BoundariesOnly, 0, 0, record_values};
  }
};

// One SGD run x_{t+1} = x_t - gamma grad f_{i_t}(x_t) for t = 0..T-1,
// deterministic in (problem, schedule, gamma, x0). Carries everything needed
// to replay the exact iterate sequence.
struct Trajectory {
  OrderingStrategy strategy;
  std::uint64_t schedule_seed = 0;
  int n = 0;

  Vector x0;
  double gamma = 0.0;
  long T = 0;  // final iteration index; iterates are x_0 .. x_T

  std::vector<long> eval_steps;
  std::vector<double> grad_norms;  // ||grad f(x_t)|| at eval_steps
  std::vector<double> fvals;       // f(x_t) at eval_steps when recorded

  std::vector<long> iterate_steps;
  std::vector<Vector> iterates;
  Vector x_final;

  RecordPolicy policy;

  // Set when the run was recovered after a divergence (harness use); a
  // trajectory returned by run() never has it.
  std::optional<long> diverged_at;

  Schedule schedule() const { return Schedule(strategy, n, schedule_seed); }
  const Vector* stored_iterate(long t) const;
  double final_grad_norm() const;
};

// Runs T steps. Throws divergence_error when an iterate grows a non-finite
// coordinate or ||x|| exceeds the guard threshold.
Trajectory run(const FiniteSumProblem& p, const Schedule& s, double gamma,
               long T, const Vector& x0, const RecordPolicy& policy = {});

// Same loop, but returns the partial trajectory with diverged_at set instead
// of throwing, so experiment cells can keep what they measured.
Trajectory run_recovering(const FiniteSumProblem& p, const Schedule& s,
                          double gamma, long T, const Vector& x0,
                          const RecordPolicy& policy = {});

// Invokes visit(t, x_t, i_t) for t = 0..T by replaying the exact update
// sequence (i_t is the index used to leave x_t; for t = T it is the schedule's
// next index, which checkers need for the final window term).
void replay(const FiniteSumProblem& p, const Trajectory& traj,
            const std::function<void(long, const Vector&, int)>& visit);

// The appendix's restart device: virtual iterates following the full
// gradient of the real trajectory, resynchronized to x_t whenever t is a
// multiple of tau.
struct VirtualSequence {
  long tau = 1;
  std::vector<Vector> virtual_iterates;  // aligned with x_0 .. x_T
  std::vector<double> distances;         // ||x~_t - x_t||

  bool is_restart(long t) const { return t % tau == 0; }
};

VirtualSequence virtual_sequence(const Trajectory& traj,
                                 const FiniteSumProblem& p, long tau);

// First t at the evaluation cadence with ||grad f(x_t)|| <= eps, or nullopt
// when the target is not reached within t_cap (divergence counts as not
// reached). Cadence points are t = 0, eval_every, 2 eval_every, ..., t_cap.
std::optional<long> first_passage(const FiniteSumProblem& p, const Schedule& s,
                                  double gamma, double eps, long t_cap,
                                  const Vector& x0, long eval_every = 0);

struct TminStats {
  std::vector<long> per_repeat;  // first-passage iteration, t_cap if censored
  std::vector<bool> censored;
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  int censored_count = 0;

  double ci_lo() const { return mean - ci_halfwidth; }
  double ci_hi() const { return mean + ci_halfwidth; }
};

// Per repeat: the minimum over the stepsize grid of the first-passage time to
// grad-norm eps, starting from x0 = 0. A repeat where no grid point reaches
// the target is censored at t_cap (reported, not thrown). Within a repeat all
// grid points share one schedule seed, so the grid minimum compares stepsizes
// on the same ordering realization.
TminStats iterations_to_accuracy(const FiniteSumProblem& p,
                                 const OrderingStrategy& strategy,
                                 const std::vector<double>& gamma_grid,
                                 double eps, int repeats, long t_cap,
                                 std::uint64_t seed, long eval_every = 0);

}  // namespace shufflebench
