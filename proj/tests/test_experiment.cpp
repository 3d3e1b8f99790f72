#include "shufflebench/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shufflebench/csv.hpp"
#include "shufflebench/errors.hpp"
#include "test_support.hpp"

using namespace shufflebench;
namespace ts = shufflebench::testing;

namespace {

std::string strip_timestamp(const std::string& csv) {
  std::istringstream in(csv);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp=", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

ExperimentConfig small_convergence_config() {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::Convergence;
  cfg.problem.family = ProblemSpec::Family::Quadratic;
  cfg.problem.d = 6;
  cfg.problem.n = 4;
  cfg.problem.sigma_sgd_sq = 0.05;
  cfg.problem.problem_seed = 3;
  cfg.strategies = {OrderingStrategy::with_replacement(),
                    OrderingStrategy::single_shuffle()};
  cfg.gammas = {0.05, 0.02};
  cfg.epochs = 4;
  cfg.repeats = 3;
  cfg.seed = 11;
  return cfg;
}

int run_cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("shufflebench"));
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("convergence experiment emits the documented schema") {
  auto cfg = small_convergence_config();
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.diverged_cells.empty());

  std::istringstream in(result.csv);
  std::string line;
  int header_comments = 0;
  bool saw_header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) == 0) {
      ++header_comments;
      continue;
    }
    if (!saw_header) {
      CHECK(line == "strategy,gamma,seed,epoch,grad_norm,fval");
      saw_header = true;
      continue;
    }
    ++rows;
  }
  CHECK(header_comments >= 4);
  // cells x (epochs + 1) eval points, eval once per epoch including t = 0
  CHECK(rows == 2 * 2 * 3 * 5);
}

TEST_CASE("experiments are byte-identical across runs and worker counts") {
  auto cfg = small_convergence_config();
  cfg.workers = 1;
  const std::string serial = strip_timestamp(run_experiment(cfg).csv);
  cfg.workers = 4;
  const std::string parallel = strip_timestamp(run_experiment(cfg).csv);
  CHECK(serial == parallel);
  const std::string again = strip_timestamp(run_experiment(cfg).csv);
  CHECK(parallel == again);
}

TEST_CASE("cell seeds are stable under grid reordering") {
  auto cfg = small_convergence_config();
  const std::string a = strip_timestamp(run_experiment(cfg).csv);
  std::swap(cfg.gammas[0], cfg.gammas[1]);
  const std::string b = strip_timestamp(run_experiment(cfg).csv);
  // same cells, different row order: compare as sorted multisets of rows
  auto sorted_rows = [](const std::string& csv) {
    std::vector<std::string> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind('#', 0) != 0 && line.rfind("strategy", 0) != 0 &&
          !line.empty()) {
        rows.push_back(line);
      }
    }
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  CHECK(sorted_rows(a) == sorted_rows(b));
}

TEST_CASE("diverging cells are marked and the experiment continues") {
  auto cfg = small_convergence_config();
  cfg.gammas = {100.0, 0.02};  // the first gamma blows up
  const ExperimentResult result = run_experiment(cfg);
  CHECK_FALSE(result.diverged_cells.empty());
  CHECK(result.csv.find("# diverged strategy=") != std::string::npos);
  // the sane gamma still produced rows
  CHECK(result.csv.find("\nsgd,0.02,") != std::string::npos);
}

TEST_CASE("experiment output lands atomically at the configured path") {
  auto cfg = small_convergence_config();
  cfg.output_path = temp_path("shufflebench_out/conv.csv");
  std::filesystem::remove_all(temp_path("shufflebench_out"));
  const ExperimentResult result = run_experiment(cfg);
  CHECK(read_file(cfg.output_path) == result.csv);
  std::filesystem::remove_all(temp_path("shufflebench_out"));
}

TEST_CASE("tmin_vs_n emits mean and confidence columns per strategy and n") {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::TminVsN;
  cfg.problem.family = ProblemSpec::Family::Quadratic;
  cfg.problem.d = 6;
  cfg.problem.n = 4;
  cfg.problem.sigma_sgd_sq = 0.0;
  cfg.problem.eig_min = 0.5;
  cfg.problem.problem_seed = 5;
  cfg.strategies = {OrderingStrategy::incremental(),
                    OrderingStrategy::single_shuffle()};
  cfg.gammas = {0.2};
  cfg.eps = 1e-3;
  cfg.repeats = 3;
  cfg.epochs = 200;
  cfg.n_list = {4, 8};
  cfg.seed = 2;
  const ExperimentResult result = run_experiment(cfg);

  std::istringstream in(result.csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) == 0) continue;
    rows.push_back(line);
  }
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "strategy,n,mean_tmin,ci_lo,ci_hi,censored_count");
  CHECK(rows[1].rfind("ig,4,", 0) == 0);
  CHECK(rows[2].rfind("ig,8,", 0) == 0);
  CHECK(rows[3].rfind("ss,4,", 0) == 0);
  // deterministic incremental runs have zero-width intervals
  std::istringstream row(rows[1]);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(row, field, ',')) fields.push_back(field);
  CHECK(fields[2] == fields[3]);
  CHECK(fields[3] == fields[4]);
  CHECK(fields[5] == "0");
}

TEST_CASE("variance profile mode emits bounds and overlays") {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::VarianceProfile;
  cfg.problem.family = ProblemSpec::Family::Quadratic;
  cfg.problem.d = 5;
  cfg.problem.n = 8;
  cfg.problem.sigma_sgd_sq = 0.3;
  cfg.problem.problem_seed = 9;
  cfg.strategies = {OrderingStrategy::single_shuffle()};
  cfg.gammas = {0.01};
  cfg.tau_list = {1, 2, 4, 8};
  cfg.num_orderings = 50;
  cfg.seed = 31;
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.csv.find("strategy,tau,sigma_hat_sq,ci_halfwidth,bound_value") !=
        std::string::npos);
  CHECK(result.csv.find("# overlay strategy=ss") != std::string::npos);
  CHECK(result.csv.find("n_sigma_sgd_sq=") != std::string::npos);
  CHECK(result.csv.find("sigma_epoch_sq=") != std::string::npos);
  // four tau rows for the single strategy
  CHECK(result.csv.find("\nss,1,") != std::string::npos);
  CHECK(result.csv.find("\nss,8,") != std::string::npos);
}

TEST_CASE("bound_check mode reports lemma and descent ratios") {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::BoundCheck;
  cfg.problem.family = ProblemSpec::Family::Quadratic;
  cfg.problem.d = 8;
  cfg.problem.n = 5;
  cfg.problem.sigma_sgd_sq = 0.2;
  cfg.problem.problem_seed = 17;
  cfg.strategies = {OrderingStrategy::random_reshuffle()};
  cfg.gammas = {0.01};
  cfg.epochs = 5;
  cfg.repeats = 2;
  cfg.seed = 23;
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.check_passed);
  CHECK(result.lemma_max_ratio <= 1.0 + 1e-9);
  CHECK(result.descent_max_ratio <= 1.0 + 1e-9);
  CHECK(result.csv.find("t,lhs,rhs,ratio") != std::string::npos);
  CHECK(result.csv.find("# repeat=1 ") != std::string::npos);
}

TEST_CASE("tuning prefers the faster admissible stepsize on noiseless quadratics") {
  const auto p = quadratic_new(6, 4, 0.0, 0.3, 1.0, 3);
  const double L = p.smoothness();
  const std::vector<double> grid = {1.0 / (2.0 * L),
                                    max_admissible_gamma(L)};
  const auto tuned =
      tune_stepsize(p, OrderingStrategy::incremental(), grid,
                    TuneCriterion::FinalGradNorm, 200, 1, 5);
  CHECK(tuned.best_gamma == grid[0]);
  REQUIRE(tuned.scores.size() == 2);
  CHECK(tuned.scores[0].second < tuned.scores[1].second);
}

TEST_CASE("tuning a single-point grid returns it") {
  const auto p = quadratic_new(4, 3, 0.1, 0.3, 1.0, 7);
  const auto tuned =
      tune_stepsize(p, OrderingStrategy::single_shuffle(), {0.05},
                    TuneCriterion::FinalGradNorm, 100, 2, 9);
  CHECK(tuned.best_gamma == 0.05);
}

TEST_CASE("tuning fails loudly when every grid point diverges") {
  const auto p = quadratic_new(4, 3, 0.1, 0.3, 1.0, 11);
  CHECK_THROWS_AS(tune_stepsize(p, OrderingStrategy::incremental(),
                                {50.0, 80.0}, TuneCriterion::FinalGradNorm,
                                500, 1, 13),
                  tuning_error);
}

TEST_CASE("first-passage tuning matches iterations_to_accuracy semantics") {
  const auto p = quadratic_new(6, 4, 0.05, 0.5, 1.0, 13);
  const std::vector<double> grid = {0.15, 0.01};
  const auto tuned = tune_stepsize(p, OrderingStrategy::single_shuffle(), grid,
                                   TuneCriterion::FirstPassage, 4000, 3, 17,
                                   /*eps=*/0.05);
  CHECK(tuned.best_gamma == 0.15);  // bigger stepsize reaches eps sooner
}

TEST_CASE("trajectory CSV carries epoch, iteration and gradient columns") {
  const auto p = quadratic_new(4, 3, 0.1, 0.3, 1.0, 19);
  const Schedule s(OrderingStrategy::incremental(), 3, 0);
  RecordPolicy policy = RecordPolicy::per_epoch(/*record_values=*/true);
  const auto traj = run(p, s, 0.05, 9, Vector::Zero(4), policy);
  const std::string csv = trajectory_csv(traj);
  CHECK(csv.rfind("epoch,iteration,grad_norm,fval\n", 0) == 0);
  CHECK(csv.find("\n0,0,") != std::string::npos);
  CHECK(csv.find("\n3,9,") != std::string::npos);
}

TEST_CASE("cli: run writes the configured CSV and exits zero") {
  const std::string cfg_path = temp_path("shufflebench_cli_run.toml");
  const std::string out_path = temp_path("shufflebench_cli_run.csv");
  {
    std::ofstream out(cfg_path);
    out << "mode = \"convergence\"\n"
        << "seed = 5\n"
        << "output = \"" << out_path << "\"\n"
        << "[problem]\n"
        << "type = \"quadratic\"\n"
        << "d = 4\nn = 3\nsigma_sgd_sq = 0.05\n"
        << "[run]\n"
        << "strategies = [\"sgd\", \"ig\"]\n"
        << "gammas = [0.05]\n"
        << "epochs = 2\nrepeats = 1\n";
  }
  CHECK(run_cli({"run", "--config", cfg_path}) == 0);
  const std::string csv = read_file(out_path);
  CHECK(csv.find("strategy,gamma,seed,epoch,grad_norm,fval") !=
        std::string::npos);
  std::remove(cfg_path.c_str());
  std::remove(out_path.c_str());
}

TEST_CASE("cli: check prints the lemma ratio and exits by pass/fail") {
  const std::string cfg_path = temp_path("shufflebench_cli_check.toml");
  {
    std::ofstream out(cfg_path);
    out << "mode = \"bound_check\"\n"
        << "seed = 5\n"
        << "[problem]\n"
        << "type = \"quadratic\"\n"
        << "d = 6\nn = 4\nsigma_sgd_sq = 0.1\n"
        << "[run]\n"
        << "strategies = [\"ig\"]\n"
        << "gammas = [0.01]\n"
        << "epochs = 3\nrepeats = 1\n";
  }
  CHECK(run_cli({"check", "--config", cfg_path}) == 0);
  std::remove(cfg_path.c_str());
}

TEST_CASE("cli: parse-stats reports fixture statistics") {
  CHECK(run_cli({"parse-stats",
                 ts::repo_root() + "/data/w1a_fixture.libsvm"}) == 0);
  CHECK(run_cli({"parse-stats", "/nonexistent/file.libsvm"}) == 2);
}

TEST_CASE("cli: bad flags and configs exit with code 1") {
  CHECK(run_cli({"run", "--nonsense"}) == 1);
  CHECK(run_cli({"frobnicate"}) == 1);
  const std::string cfg_path = temp_path("shufflebench_cli_bad.toml");
  {
    std::ofstream out(cfg_path);
    out << "mode = \"convergence\"\n";  // missing everything else
  }
  CHECK(run_cli({"run", "--config", cfg_path}) == 1);
  std::remove(cfg_path.c_str());
}

TEST_CASE("worker resolution honors config, environment, and cell count") {
  CHECK(resolve_workers(3, 100) == 3);
  CHECK(resolve_workers(8, 2) == 2);
  setenv(kWorkersEnvVar, "5", 1);
  CHECK(resolve_workers(0, 100) == 5);
  unsetenv(kWorkersEnvVar);
  CHECK(resolve_workers(0, 1) == 1);
}
