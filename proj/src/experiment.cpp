#include "shufflebench/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "shufflebench/csv.hpp"
#include "shufflebench/errors.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

std::uint64_t cell_seed(std::uint64_t master, const OrderingStrategy& strategy,
                        double gamma, int repeat) {
  // Hashes the gamma *value*, not its grid position, so reordering the grid
  // does not move cell seeds.
  const std::string name = strategy.name();
  std::uint64_t s = rng::hash_bytes(master, name.data(), name.size());
  s = rng::hash_double(s, gamma);
  return rng::derive(s, static_cast<std::uint64_t>(repeat));
}

void run_cells(std::size_t num_cells, int workers,
               const std::function<void(std::size_t)>& body) {
  if (num_cells == 0) return;
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_cells; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= num_cells) return;
        try {
          body(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance_header(const ExperimentConfig& cfg) {
  std::string out;
  out += "# shufflebench " + mode_name(cfg.mode) + " schema v1\n";
  out += "# config_hash=" + hex64(cfg.config_hash()) + "\n";
  out += "# seed=" + std::to_string(cfg.seed) + "\n";
  out += "# version=" + std::string(kVersion) + "\n";
  out += "# timestamp=" + iso_timestamp() + "\n";
  return out;
}

struct CellOutput {
  std::string rows;
  std::string comments;        // per-cell comment lines (divergence etc.)
  std::string diverged_label;  // empty when the cell completed
  double lemma_ratio = 0.0;
  double descent_lhs = 0.0;
  double descent_ratio = 0.0;
  bool lemma_passed = true;
  CheckReport lemma_report;
};

// ---------------------------------------------------------------------------
// convergence mode: (strategy, gamma, seed, epoch, grad_norm, fval)
// ---------------------------------------------------------------------------

ExperimentResult run_convergence(const ExperimentConfig& cfg) {
  const auto problem = cfg.problem.build();
  const int n = problem->num_components();
  const long T = cfg.epochs * n;

  struct Cell {
    std::size_t strategy;
    std::size_t gamma;
    int repeat;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
      for (int r = 0; r < cfg.repeats; ++r) cells.push_back({s, g, r});
    }
  }

  std::vector<CellOutput> outputs(cells.size());
  const int workers = resolve_workers(cfg.workers, cells.size());
  run_cells(cells.size(), workers, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const OrderingStrategy& strategy = cfg.strategies[cell.strategy];
    const double gamma = cfg.gammas[cell.gamma];
    const Schedule schedule(strategy, n,
                            cell_seed(cfg.seed, strategy, gamma, cell.repeat));

    RecordPolicy policy;
    policy.eval_every = cfg.eval_every;
    policy.record_values = cfg.record_values;
    const Trajectory traj = run_recovering(
        *problem, schedule, gamma, T, Vector::Zero(problem->dimension()), policy);

    CellOutput& out = outputs[c];
    std::ostringstream rows;
    for (std::size_t k = 0; k < traj.eval_steps.size(); ++k) {
      rows << strategy.name() << ',' << format_double(gamma) << ','
           << cell.repeat << ','
           << format_double(static_cast<double>(traj.eval_steps[k]) /
                            static_cast<double>(n))
           << ',' << format_double(traj.grad_norms[k]) << ','
           << (cfg.record_values ? format_double(traj.fvals[k]) : "") << "\n";
    }
    out.rows = rows.str();
    if (traj.diverged_at) {
      out.diverged_label = strategy.name() + " gamma=" + format_double(gamma) +
                           " seed=" + std::to_string(cell.repeat);
      out.comments = "# diverged strategy=" + strategy.name() +
                     " gamma=" + format_double(gamma) +
                     " seed=" + std::to_string(cell.repeat) +
                     " at_t=" + std::to_string(*traj.diverged_at) + "\n";
    }
  });

  ExperimentResult result;
  result.mode = cfg.mode;
  std::string csv = provenance_header(cfg);
  for (const auto& out : outputs) csv += out.comments;
  csv += "strategy,gamma,seed,epoch,grad_norm,fval\n";
  for (auto& out : outputs) {
    csv += out.rows;
    if (!out.diverged_label.empty()) {
      result.diverged_cells.push_back(out.diverged_label);
    }
  }
  result.csv = std::move(csv);
  return result;
}

// ---------------------------------------------------------------------------
// tmin_vs_n mode: (strategy, n, mean_tmin, ci_lo, ci_hi, censored_count)
// ---------------------------------------------------------------------------

ExperimentResult run_tmin(const ExperimentConfig& cfg) {
  std::vector<int> n_values = cfg.n_list;
  if (n_values.empty()) n_values.push_back(cfg.problem.n);

  struct Cell {
    std::size_t strategy;
    std::size_t n_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    for (std::size_t k = 0; k < n_values.size(); ++k) cells.push_back({s, k});
  }

  // One problem per n, shared by every strategy so the comparison is on the
  // same instance.
  std::vector<std::unique_ptr<FiniteSumProblem>> problems;
  for (int n : n_values) problems.push_back(cfg.problem.build(n));

  const long t_cap_epochs = cfg.t_cap_epochs > 0 ? cfg.t_cap_epochs : cfg.epochs;
  std::vector<CellOutput> outputs(cells.size());
  const int workers = resolve_workers(cfg.workers, cells.size());
  run_cells(cells.size(), workers, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const OrderingStrategy& strategy = cfg.strategies[cell.strategy];
    const FiniteSumProblem& p = *problems[cell.n_idx];
    const int n = n_values[cell.n_idx];
    const long t_cap = t_cap_epochs * n;

    const std::string sname = strategy.name();
    const std::uint64_t seed =
        rng::derive(rng::hash_bytes(cfg.seed, sname.data(), sname.size()),
                    static_cast<std::uint64_t>(n));
    const TminStats stats =
        iterations_to_accuracy(p, strategy, cfg.gammas, cfg.eps, cfg.repeats,
                               t_cap, seed, cfg.eval_every);

    std::ostringstream rows;
    rows << sname << ',' << n << ',' << format_double(stats.mean) << ','
         << format_double(stats.ci_lo()) << ',' << format_double(stats.ci_hi())
         << ',' << stats.censored_count << "\n";
    outputs[c].rows = rows.str();
  });

  ExperimentResult result;
  result.mode = cfg.mode;
  std::string csv = provenance_header(cfg);
  csv += "strategy,n,mean_tmin,ci_lo,ci_hi,censored_count\n";
  for (const auto& out : outputs) csv += out.rows;
  result.csv = std::move(csv);
  return result;
}

// ---------------------------------------------------------------------------
// variance_profile mode: (strategy, tau, sigma_hat_sq, ci_halfwidth,
// bound_value), with overlay constants in comment lines
// ---------------------------------------------------------------------------

ExperimentResult run_variance(const ExperimentConfig& cfg) {
  const auto problem = cfg.problem.build();
  const int n = problem->num_components();
  const std::vector<Vector> probes = {Vector::Zero(problem->dimension())};

  std::vector<CellOutput> outputs(cfg.strategies.size());
  const int workers = resolve_workers(cfg.workers, cfg.strategies.size());
  run_cells(cfg.strategies.size(), workers, [&](std::size_t c) {
    const OrderingStrategy& strategy = cfg.strategies[c];
    const std::string sname = strategy.name();
    const std::uint64_t seed =
        rng::hash_bytes(cfg.seed, sname.data(), sname.size());

    const double sgd_var = sigma_sgd_sq(*problem, probes);
    const VarianceProfile profile =
        variance_profile(*problem, strategy, cfg.tau_list, probes,
                         cfg.num_orderings, seed);
    const SigmaTauEstimate epoch_est = sigma_epoch_sq(
        *problem, strategy, probes, cfg.num_orderings, seed);

    double sigma_one_sq = 0.0;
    if (strategy.kind == OrderingKind::SingleFunction) {
      const Vector dev =
          problem->component_gradient(strategy.single_index, probes[0]) -
          problem->full_gradient(probes[0]);
      sigma_one_sq = dev.squaredNorm();
    }

    std::ostringstream rows;
    rows << "# overlay strategy=" << sname
         << " sigma_sgd_sq=" << format_double(sgd_var)
         << " n_sigma_sgd_sq=" << format_double(n * sgd_var)
         << " sigma_epoch_sq=" << format_double(epoch_est.value) << "\n";
    for (std::size_t k = 0; k < profile.taus.size(); ++k) {
      std::string bound;
      if (strategy.kind != OrderingKind::Explicit) {
        bound = format_double(sigma_tau_bound(strategy.kind, profile.taus[k],
                                              n, sgd_var, sigma_one_sq));
      }
      rows << sname << ',' << profile.taus[k] << ','
           << format_double(profile.sigma_hat_sq[k]) << ','
           << format_double(profile.ci_halfwidth[k]) << ',' << bound << "\n";
    }
    outputs[c].rows = rows.str();
  });

  ExperimentResult result;
  result.mode = cfg.mode;
  std::string csv = provenance_header(cfg);
  csv += "strategy,tau,sigma_hat_sq,ci_halfwidth,bound_value\n";
  for (const auto& out : outputs) csv += out.rows;
  result.csv = std::move(csv);
  return result;
}

// ---------------------------------------------------------------------------
// bound_check mode: (t, lhs, rhs, ratio) of the lemma check for the worst
// repeat, with per-repeat summaries (lemma + descent) in comment lines
// ---------------------------------------------------------------------------

ExperimentResult run_bound_check(const ExperimentConfig& cfg) {
  const auto problem = cfg.problem.build();
  const int n = problem->num_components();
  const OrderingStrategy& strategy = cfg.strategies.front();
  const double gamma = cfg.gammas.front();
  const double smoothness = problem->smoothness();
  const long tau = tau_from_stepsize(smoothness, gamma);
  const long T = cfg.epochs * n;
  const double f_star = reference_minimum(*problem);

  // sigma^2_SGD surrogate at x0 = 0 (exact for quadratics, whose deviations
  // do not depend on x).
  const std::vector<Vector> probes = {Vector::Zero(problem->dimension())};
  const double sgd_var = sigma_sgd_sq(*problem, probes);
  double sigma_one_sq = 0.0;
  if (strategy.kind == OrderingKind::SingleFunction) {
    const Vector dev =
        problem->component_gradient(strategy.single_index, probes[0]) -
        problem->full_gradient(probes[0]);
    sigma_one_sq = dev.squaredNorm();
  }
  const double sigma_bound =
      strategy.kind == OrderingKind::Explicit
          ? estimate_sigma_tau(*problem, strategy, tau, probes,
                               cfg.num_orderings, cfg.seed)
                .value
          : sigma_tau_bound(strategy.kind, tau, n, sgd_var, sigma_one_sq);

  std::vector<CellOutput> outputs(static_cast<std::size_t>(cfg.repeats));
  std::vector<Trajectory> trajectories(static_cast<std::size_t>(cfg.repeats));
  const int workers = resolve_workers(cfg.workers, outputs.size());
  run_cells(outputs.size(), workers, [&](std::size_t c) {
    const Schedule schedule(
        strategy, n,
        cell_seed(cfg.seed, strategy, gamma, static_cast<int>(c)));
    const Trajectory traj = run(*problem, schedule, gamma, T,
                                Vector::Zero(problem->dimension()),
                                RecordPolicy::per_epoch());
    CellOutput& out = outputs[c];
    out.lemma_report = lemma_consensus_check(traj, *problem, gamma, tau);
    out.lemma_ratio = out.lemma_report.max_ratio;
    out.lemma_passed = out.lemma_report.passed;
    const CheckReport descent =
        descent_bound_check(traj, *problem, gamma, sigma_bound, f_star);
    out.descent_lhs = descent.rows.front().lhs;
    out.descent_ratio = descent.max_ratio;
    trajectories[c] = traj;
  });

  ExperimentResult result;
  result.mode = cfg.mode;
  result.check_passed = true;
  std::size_t worst = 0;
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    result.lemma_max_ratio = std::max(result.lemma_max_ratio, outputs[c].lemma_ratio);
    if (outputs[c].lemma_ratio > outputs[worst].lemma_ratio) worst = c;
    if (!outputs[c].lemma_passed) result.check_passed = false;
  }

  // Descent semantics: per-trajectory for orders whose sigma bound holds
  // pointwise, mean over repeats for with-replacement sampling.
  const bool pointwise = strategy.kind != OrderingKind::WithReplacement;
  std::string descent_summary;
  if (pointwise) {
    for (std::size_t c = 0; c < outputs.size(); ++c) {
      result.descent_max_ratio =
          std::max(result.descent_max_ratio, outputs[c].descent_ratio);
      if (outputs[c].descent_ratio > 1.0 + 1e-9) result.check_passed = false;
    }
    descent_summary = "# descent per-trajectory max_ratio=" +
                      format_double(result.descent_max_ratio) + "\n";
  } else {
    const CheckReport agg = descent_bound_aggregate(
        trajectories, *problem, gamma, sigma_bound, f_star);
    result.descent_max_ratio = agg.max_ratio;
    if (!agg.passed) result.check_passed = false;
    descent_summary = "# descent seed-aggregate ratio=" +
                      format_double(agg.max_ratio) + " repeats=" +
                      std::to_string(cfg.repeats) + "\n";
  }

  std::string csv = provenance_header(cfg);
  csv += "# strategy=" + strategy.name() + " gamma=" + format_double(gamma) +
         " tau=" + std::to_string(tau) +
         " sigma_tau_sq_bound=" + format_double(sigma_bound) + "\n";
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    csv += "# repeat=" + std::to_string(c) +
           " lemma_max_ratio=" + format_double(outputs[c].lemma_ratio) +
           " descent_ratio=" + format_double(outputs[c].descent_ratio) + "\n";
  }
  csv += descent_summary;
  csv += "# lemma max_ratio=" + format_double(result.lemma_max_ratio) +
         " passed=" + (result.check_passed ? std::string("1") : std::string("0")) +
         "\n";
  csv += "t,lhs,rhs,ratio\n";
  for (const auto& row : outputs[worst].lemma_report.rows) {
    csv += std::to_string(row.t) + ',' + format_double(row.lhs) + ',' +
           format_double(row.rhs) + ',' + format_double(row.ratio) + "\n";
  }
  result.csv = std::move(csv);
  return result;
}

}  // namespace

int resolve_workers(int config_workers, std::size_t num_cells) {
  int workers = config_workers;
  if (workers <= 0) {
    if (const char* env = std::getenv(kWorkersEnvVar)) {
      workers = std::atoi(env);
    }
  }
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  if (workers < 1) workers = 1;
  if (static_cast<std::size_t>(workers) > num_cells && num_cells > 0) {
    workers = static_cast<int>(num_cells);
  }
  return workers;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  switch (cfg.mode) {
    case ExperimentMode::Convergence:
      result = run_convergence(cfg);
      break;
    case ExperimentMode::TminVsN:
      result = run_tmin(cfg);
      break;
    case ExperimentMode::VarianceProfile:
      result = run_variance(cfg);
      break;
    case ExperimentMode::BoundCheck:
      result = run_bound_check(cfg);
      break;
  }
  if (!cfg.output_path.empty()) {
    write_file_atomic(cfg.output_path, result.csv);
  }
  return result;
}

TuneResult tune_stepsize(const FiniteSumProblem& p,
                         const OrderingStrategy& strategy,
                         const std::vector<double>& grid,
                         TuneCriterion criterion, long budget, int repeats,
                         std::uint64_t seed, double eps) {
  if (grid.empty()) throw parameter_error("tune_stepsize: empty grid");
  if (repeats < 1) throw parameter_error("tune_stepsize: repeats must be >= 1");
  if (budget < 1) throw parameter_error("tune_stepsize: budget must be >= 1");
  if (criterion == TuneCriterion::FirstPassage && !(eps > 0.0)) {
    throw parameter_error("tune_stepsize: first-passage criterion needs eps > 0");
  }

  const double inf = std::numeric_limits<double>::infinity();
  const Vector x0 = Vector::Zero(p.dimension());
  TuneResult result;
  result.scores.reserve(grid.size());

  for (double gamma : grid) {
    double total = 0.0;
    bool failed = false;
    for (int r = 0; r < repeats && !failed; ++r) {
      const Schedule schedule(strategy, p.num_components(),
                              rng::derive(seed, static_cast<std::uint64_t>(r)));
      if (criterion == TuneCriterion::FirstPassage) {
        const auto t = first_passage(p, schedule, gamma, eps, budget, x0);
        if (t) {
          total += static_cast<double>(*t);
        } else {
          failed = true;
        }
      } else {
        const Trajectory traj =
            run_recovering(p, schedule, gamma, budget, x0);
        if (traj.diverged_at) {
          failed = true;
        } else {
          total += traj.final_grad_norm();
        }
      }
    }
    result.scores.emplace_back(
        gamma, failed ? inf : total / static_cast<double>(repeats));
  }

  double best_score = inf;
  double best_gamma = 0.0;
  bool found = false;
  for (const auto& [gamma, score] : result.scores) {
    if (score < best_score ||
        (score == best_score && found && gamma < best_gamma)) {
      best_score = score;
      best_gamma = gamma;
      found = true;
    }
  }
  if (!found || std::isinf(best_score)) {
    std::string msg = "tune_stepsize: every grid point failed:";
    for (const auto& [gamma, score] : result.scores) {
      msg += " gamma=" + format_double(gamma);
    }
    throw tuning_error(msg);
  }
  result.best_gamma = best_gamma;
  return result;
}

std::string trajectory_csv(const Trajectory& traj) {
  const bool with_fvals = !traj.fvals.empty();
  std::string out = with_fvals ? "epoch,iteration,grad_norm,fval\n"
                               : "epoch,iteration,grad_norm\n";
  for (std::size_t k = 0; k < traj.eval_steps.size(); ++k) {
    const long t = traj.eval_steps[k];
    out += format_double(static_cast<double>(t) /
                         static_cast<double>(traj.n)) +
           ',' + std::to_string(t) + ',' + format_double(traj.grad_norms[k]);
    if (with_fvals) out += ',' + format_double(traj.fvals[k]);
    out += '\n';
  }
  return out;
}

}  // namespace shufflebench
