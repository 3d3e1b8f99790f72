#include "shufflebench/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shufflebench/errors.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

constexpr double kNormGuard = 1e12;

bool guard_tripped(const Vector& x) {
  return !x.allFinite() || x.norm() > kNormGuard;
}

// Shared by run and replay so replayed iterates are bitwise identical.
inline void sgd_step(const FiniteSumProblem& p, int index, double gamma,
                     Vector& x, Vector& grad_buf) {
  p.component_gradient(index, x, grad_buf);
  x -= gamma * grad_buf;
}

Trajectory run_impl(const FiniteSumProblem& p, const Schedule& s, double gamma,
                    long T, const Vector& x0, const RecordPolicy& policy,
                    bool recover) {
  if (gamma <= 0.0) throw parameter_error("run: gamma must be > 0");
  if (T < 0) throw parameter_error("run: T must be >= 0");
  if (x0.size() != p.dimension()) {
    throw parameter_error("run: x0 dimension mismatch");
  }
  if (!x0.allFinite()) throw parameter_error("run: x0 must be finite");
  if (s.n() != p.num_components()) {
    throw parameter_error("run: schedule n does not match problem n");
  }

  Trajectory traj;
  traj.strategy = s.strategy();
  traj.schedule_seed = s.seed();
  traj.n = s.n();
  traj.x0 = x0;
  traj.gamma = gamma;
  traj.T = T;
  traj.policy = policy;

  const long eval_every =
      policy.eval_every > 0 ? policy.eval_every : p.num_components();
  const bool full = policy.iterates == RecordPolicy::Iterates::Full;

  Vector x = x0;
  Vector grad(p.dimension());
  ScheduleCursor cursor(s);

  auto record_iterate = [&](long t) {
    if (full || t == 0 ||
        (policy.boundary_period > 0 && t % policy.boundary_period == 0)) {
      traj.iterate_steps.push_back(t);
      traj.iterates.push_back(x);
    }
  };
  auto evaluate = [&](long t) {
    if (t % eval_every == 0 || t == T) {
      traj.eval_steps.push_back(t);
      traj.grad_norms.push_back(p.full_gradient(x).norm());
      if (policy.record_values) traj.fvals.push_back(p.value(x));
    }
  };

  record_iterate(0);
  evaluate(0);
  for (long t = 0; t < T; ++t) {
    sgd_step(p, cursor.at(t), gamma, x, grad);
    if (guard_tripped(x)) {
      if (recover) {
        // Keep what was measured; x_final stays empty (the finite prefix is
        // still replayable up to traj.T).
        traj.diverged_at = t + 1;
        traj.T = t;
        return traj;
      }
      throw divergence_error(
          "run: iterate diverged at t = " + std::to_string(t + 1), t + 1);
    }
    record_iterate(t + 1);
    evaluate(t + 1);
  }
  traj.x_final = x;
  return traj;
}

}  // namespace

const Vector* Trajectory::stored_iterate(long t) const {
  for (std::size_t k = 0; k < iterate_steps.size(); ++k) {
    if (iterate_steps[k] == t) return &iterates[k];
  }
  if (t == T && x_final.size() > 0) return &x_final;
  return nullptr;
}

double Trajectory::final_grad_norm() const {
  if (grad_norms.empty()) return std::numeric_limits<double>::quiet_NaN();
  return grad_norms.back();
}

Trajectory run(const FiniteSumProblem& p, const Schedule& s, double gamma,
               long T, const Vector& x0, const RecordPolicy& policy) {
  return run_impl(p, s, gamma, T, x0, policy, /*recover=*/false);
}

Trajectory run_recovering(const FiniteSumProblem& p, const Schedule& s,
                          double gamma, long T, const Vector& x0,
                          const RecordPolicy& policy) {
  return run_impl(p, s, gamma, T, x0, policy, /*recover=*/true);
}

void replay(const FiniteSumProblem& p, const Trajectory& traj,
            const std::function<void(long, const Vector&, int)>& visit) {
  if (traj.n != p.num_components() || traj.x0.size() != p.dimension()) {
    throw parameter_error("replay: trajectory does not match problem");
  }
  const Schedule s = traj.schedule();
  ScheduleCursor cursor(s);
  Vector x = traj.x0;
  Vector grad(p.dimension());
  for (long t = 0; t <= traj.T; ++t) {
    const int index = cursor.at(t);
    visit(t, x, index);
    if (t < traj.T) sgd_step(p, index, traj.gamma, x, grad);
  }
}

VirtualSequence virtual_sequence(const Trajectory& traj,
                                 const FiniteSumProblem& p, long tau) {
  if (tau < 1) throw parameter_error("virtual_sequence: tau must be >= 1");
  if (traj.x0.size() == 0) {
    throw parameter_error("virtual_sequence: trajectory not replayable");
  }

  VirtualSequence vs;
  vs.tau = tau;
  vs.virtual_iterates.reserve(static_cast<std::size_t>(traj.T) + 1);
  vs.distances.reserve(static_cast<std::size_t>(traj.T) + 1);

  const Schedule s = traj.schedule();
  ScheduleCursor cursor(s);
  Vector x = traj.x0;
  Vector x_virtual = traj.x0;
  Vector grad(p.dimension());

  for (long t = 0; t <= traj.T; ++t) {
    vs.virtual_iterates.push_back(x_virtual);
    vs.distances.push_back((x_virtual - x).norm());
    if (t == traj.T) break;
    // Virtual step follows the full gradient at the *real* iterate; restart
    // resynchronizes whenever (t + 1) mod tau == 0.
    const Vector g_full = p.full_gradient(x);
    sgd_step(p, cursor.at(t), traj.gamma, x, grad);
    if ((t + 1) % tau == 0) {
      x_virtual = x;
    } else {
      x_virtual -= traj.gamma * g_full;
    }
  }
  return vs;
}

std::optional<long> first_passage(const FiniteSumProblem& p, const Schedule& s,
                                  double gamma, double eps, long t_cap,
                                  const Vector& x0, long eval_every) {
  if (gamma <= 0.0) throw parameter_error("first_passage: gamma must be > 0");
  if (eps <= 0.0) throw parameter_error("first_passage: eps must be > 0");
  const long cadence = eval_every > 0 ? eval_every : p.num_components();

  Vector x = x0;
  Vector grad(p.dimension());
  ScheduleCursor cursor(s);
  for (long t = 0; t <= t_cap; ++t) {
    if (t % cadence == 0 || t == t_cap) {
      if (p.full_gradient(x).norm() <= eps) return t;
    }
    if (t == t_cap) break;
    sgd_step(p, cursor.at(t), gamma, x, grad);
    if (guard_tripped(x)) return std::nullopt;
  }
  return std::nullopt;
}

TminStats iterations_to_accuracy(const FiniteSumProblem& p,
                                 const OrderingStrategy& strategy,
                                 const std::vector<double>& gamma_grid,
                                 double eps, int repeats, long t_cap,
                                 std::uint64_t seed, long eval_every) {
  if (gamma_grid.empty()) {
    throw parameter_error("iterations_to_accuracy: empty stepsize grid");
  }
  if (repeats < 1) {
    throw parameter_error("iterations_to_accuracy: repeats must be >= 1");
  }
  if (eps <= 0.0) {
    throw parameter_error("iterations_to_accuracy: eps must be > 0");
  }

  TminStats stats;
  stats.per_repeat.reserve(static_cast<std::size_t>(repeats));
  stats.censored.reserve(static_cast<std::size_t>(repeats));
  const Vector x0 = Vector::Zero(p.dimension());

  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t schedule_seed =
        rng::derive(seed, static_cast<std::uint64_t>(r));
    long best = -1;
    for (double gamma : gamma_grid) {
      const Schedule s(strategy, p.num_components(), schedule_seed);
      const auto t = first_passage(p, s, gamma, eps, t_cap, x0, eval_every);
      if (t && (best < 0 || *t < best)) best = *t;
    }
    const bool censored = best < 0;
    stats.per_repeat.push_back(censored ? t_cap : best);
    stats.censored.push_back(censored);
    if (censored) ++stats.censored_count;
  }

  std::vector<double> values;
  values.reserve(stats.per_repeat.size());
  for (long v : stats.per_repeat) values.push_back(static_cast<double>(v));
  const MeanCi ci = mean_ci95(values);
  stats.mean = ci.mean;
  stats.ci_halfwidth = ci.ci_halfwidth;
  return stats;
}

}  // namespace shufflebench
