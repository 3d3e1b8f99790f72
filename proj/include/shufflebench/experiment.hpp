#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shufflebench/bounds.hpp"
#include "shufflebench/config.hpp"
#include "shufflebench/engine.hpp"
#include "shufflebench/variance.hpp"

namespace shufflebench {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kWorkersEnvVar = "SHUFFLEBENCH_WORKERS";

// Effective worker count: explicit config value, else the environment
// override, else hardware concurrency; always clamped to the cell count.
int resolve_workers(int config_workers, std::size_t num_cells);

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::Convergence;

  // Full CSV content (provenance header, optional divergence notes, column
  // header, data rows). Identical across runs and worker counts except for
  // the "# timestamp=" line.
  std::string csv;

  std::vector<std::string> diverged_cells;

  // bound_check payload
  double lemma_max_ratio = 0.0;
  double descent_max_ratio = 0.0;
  bool check_passed = true;
};

// Runs every cell of the configured experiment (in parallel up to the worker
// limit), assembles the mode's CSV deterministically, and writes it
// atomically to cfg.output_path when set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

enum class TuneCriterion { FirstPassage, FinalGradNorm };

struct TuneResult {
  double best_gamma = 0.0;
  std::vector<std::pair<double, double>> scores;  // (gamma, score) in grid order
};

// Grid search for the stepsize. FirstPassage scores by the mean
// first-passage iteration to eps within budget; FinalGradNorm scores by the
// mean full-gradient norm after budget steps. Unreachable/diverged grid
// points score infinity; if every point does, throws tuning_error listing
// them. Ties prefer the smaller gamma.
TuneResult tune_stepsize(const FiniteSumProblem& p,
                         const OrderingStrategy& strategy,
                         const std::vector<double>& grid,
                         TuneCriterion criterion, long budget, int repeats,
                         std::uint64_t seed, double eps = 0.0);

// Engine trajectory export: (epoch, iteration, grad_norm[, fval]) rows.
std::string trajectory_csv(const Trajectory& traj);

int cli_main(int argc, char** argv);

}  // namespace shufflebench
