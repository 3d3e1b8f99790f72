#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shufflebench/ordering.hpp"
#include "shufflebench/problems.hpp"
#include "shufflebench/toml_lite.hpp"

namespace shufflebench {

enum class ExperimentMode {
  Convergence,      // grad-norm-vs-epoch series per (strategy, gamma, seed)
  TminVsN,          // mean/CI of first-passage iterations per (strategy, n)
  VarianceProfile,  // empirical sigma_tau^2 table with closed-form overlays
  BoundCheck,       // lemma + descent checks on recorded trajectories
};

std::string mode_name(ExperimentMode mode);
ExperimentMode parse_mode(const std::string& name);

struct ProblemSpec {
  enum class Family { Quadratic, Logistic };

  Family family = Family::Quadratic;

  // quadratic
  int d = 1;
  int n = 1;
  double sigma_sgd_sq = 0.0;
  double eig_min = 0.1;
  double eig_max = 1.0;
  std::uint64_t problem_seed = 0;

  // logistic
  std::string dataset_path;
  int subsample_n = 0;   // 0: use every row
  int fixed_d = 0;       // 0: take d from the file
  bool scale_features = false;

  // n_override > 0 rebuilds a quadratic with that component count (used by
  // the tmin_vs_n sweep); ignored for logistic problems.
  std::unique_ptr<FiniteSumProblem> build(int n_override = 0) const;
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Convergence;
  ProblemSpec problem;

  std::vector<OrderingStrategy> strategies;
  std::vector<double> gammas;
  long epochs = 1;
  int repeats = 1;
  double eps = 0.0;
  std::vector<long> tau_list;
  int num_orderings = 100;
  std::vector<int> n_list;
  long t_cap_epochs = 0;  // 0: same as epochs
  long eval_every = 0;    // 0: once per epoch
  bool record_values = true;

  std::uint64_t seed = 0;
  std::string output_path;
  int workers = 0;  // 0: SHUFFLEBENCH_WORKERS env var, then hardware

  static ExperimentConfig from_toml(const TomlLite& toml);
  static ExperimentConfig from_file(const std::string& path);

  // Normalized key=value dump of every field that affects results; hashed
  // into the CSV provenance header.
  std::string canonical_string() const;
  std::uint64_t config_hash() const;

  void validate() const;
};

}  // namespace shufflebench
