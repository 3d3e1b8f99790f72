#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "shufflebench/csv.hpp"
#include "shufflebench/errors.hpp"
#include "shufflebench/experiment.hpp"
#include "shufflebench/libsvm.hpp"

namespace shufflebench {

namespace {

ExperimentConfig load_config(const std::string& path,
                             const std::string& output_override,
                             int workers_override) {
  ExperimentConfig cfg = ExperimentConfig::from_file(path);
  if (!output_override.empty()) cfg.output_path = output_override;
  if (workers_override > 0) cfg.workers = workers_override;
  return cfg;
}

int do_run(const ExperimentConfig& cfg) {
  const ExperimentResult result = run_experiment(cfg);
  if (!cfg.output_path.empty()) {
    std::cout << "wrote " << cfg.output_path << "\n";
  } else {
    std::cout << result.csv;
  }
  for (const auto& cell : result.diverged_cells) {
    std::cerr << "warning: diverged cell " << cell << "\n";
  }
  return 0;
}

int do_tune(const ExperimentConfig& cfg, const std::string& criterion_name) {
  TuneCriterion criterion;
  if (criterion_name == "first-passage") {
    criterion = TuneCriterion::FirstPassage;
  } else if (criterion_name == "final-grad") {
    criterion = TuneCriterion::FinalGradNorm;
  } else {
    throw config_error("criterion must be first-passage or final-grad");
  }

  const auto problem = cfg.problem.build();
  const long budget = cfg.epochs * problem->num_components();
  std::string csv = "strategy,gamma,score,is_best\n";
  for (const auto& strategy : cfg.strategies) {
    const TuneResult tuned =
        tune_stepsize(*problem, strategy, cfg.gammas, criterion, budget,
                      cfg.repeats, cfg.seed, cfg.eps);
    std::cout << strategy.name() << ": best gamma = "
              << format_double(tuned.best_gamma) << "\n";
    for (const auto& [gamma, score] : tuned.scores) {
      std::cout << "  gamma=" << format_double(gamma)
                << " score=" << format_double(score) << "\n";
      csv += strategy.name() + ',' + format_double(gamma) + ',' +
             format_double(score) + ',' +
             (gamma == tuned.best_gamma ? "1" : "0") + "\n";
    }
  }
  if (!cfg.output_path.empty()) {
    write_file_atomic(cfg.output_path, csv);
    std::cout << "wrote " << cfg.output_path << "\n";
  }
  return 0;
}

int do_check(const ExperimentConfig& cfg) {
  ExperimentConfig check_cfg = cfg;
  check_cfg.mode = ExperimentMode::BoundCheck;
  check_cfg.validate();
  const ExperimentResult result = run_experiment(check_cfg);
  std::cout << "max lemma ratio = " << format_double(result.lemma_max_ratio)
            << ", descent ratio = " << format_double(result.descent_max_ratio)
            << (result.check_passed ? " (passed)" : " (FAILED)") << "\n";
  if (!check_cfg.output_path.empty()) {
    std::cout << "wrote " << check_cfg.output_path << "\n";
  }
  return result.check_passed ? 0 : 2;
}

int do_parse_stats(const std::vector<std::string>& paths) {
  for (const auto& path : paths) {
    const Dataset ds = load_libsvm(path);
    const DatasetStats st = dataset_stats(ds);
    std::cout << path << ": n=" << st.n << " d=" << st.d << " nnz=" << st.nnz
              << " class_balance=" << format_double(st.class_balance)
              << " max_row_norm_sq=" << format_double(st.max_row_norm_sq)
              << "\n";
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Finite-sum SGD benchmark under arbitrary data orderings"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  int workers_override = 0;
  std::string criterion = "first-passage";
  std::vector<std::string> stat_paths;

  auto add_config_opts = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--output", output_override, "override the output path");
    cmd->add_option("--workers", workers_override, "override the worker count");
  };

  CLI::App* cmd_run =
      app.add_subcommand("run", "run the experiment described by a config");
  add_config_opts(cmd_run);

  CLI::App* cmd_tune =
      app.add_subcommand("tune", "grid-search the stepsize per strategy");
  add_config_opts(cmd_tune);
  cmd_tune->add_option("--criterion", criterion,
                       "first-passage (needs run.eps) or final-grad");

  CLI::App* cmd_variance = app.add_subcommand(
      "variance", "estimate the sigma_tau^2 profile (variance_profile mode)");
  add_config_opts(cmd_variance);

  CLI::App* cmd_check = app.add_subcommand(
      "check", "run the lemma/descent bound checks (bound_check mode)");
  add_config_opts(cmd_check);

  CLI::App* cmd_stats =
      app.add_subcommand("parse-stats", "print dataset statistics");
  cmd_stats->add_option("paths", stat_paths, "libsvm files (.gz accepted)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(cmd_run)) {
      return do_run(load_config(config_path, output_override, workers_override));
    }
    if (app.got_subcommand(cmd_tune)) {
      return do_tune(load_config(config_path, output_override, workers_override),
                     criterion);
    }
    if (app.got_subcommand(cmd_variance)) {
      ExperimentConfig cfg =
          load_config(config_path, output_override, workers_override);
      cfg.mode = ExperimentMode::VarianceProfile;
      cfg.validate();
      return do_run(cfg);
    }
    if (app.got_subcommand(cmd_check)) {
      return do_check(
          load_config(config_path, output_override, workers_override));
    }
    if (app.got_subcommand(cmd_stats)) {
      return do_parse_stats(stat_paths);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const parameter_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace shufflebench
