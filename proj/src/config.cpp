#include "shufflebench/config.hpp"

#include <sstream>

#include "shufflebench/csv.hpp"
#include "shufflebench/errors.hpp"
#include "shufflebench/libsvm.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

std::string mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::Convergence: return "convergence";
    case ExperimentMode::TminVsN: return "tmin_vs_n";
    case ExperimentMode::VarianceProfile: return "variance_profile";
    case ExperimentMode::BoundCheck: return "bound_check";
  }
  return "?";
}

ExperimentMode parse_mode(const std::string& name) {
  if (name == "convergence") return ExperimentMode::Convergence;
  if (name == "tmin_vs_n") return ExperimentMode::TminVsN;
  if (name == "variance_profile") return ExperimentMode::VarianceProfile;
  if (name == "bound_check") return ExperimentMode::BoundCheck;
  throw config_error("unknown mode '" + name + "'");
}

std::unique_ptr<FiniteSumProblem> ProblemSpec::build(int n_override) const {
  if (family == Family::Quadratic) {
    const int count = n_override > 0 ? n_override : n;
    return std::make_unique<QuadraticProblem>(
        quadratic_new(d, count, sigma_sgd_sq, eig_min, eig_max, problem_seed));
  }
  Dataset ds = load_libsvm(dataset_path);
  if (fixed_d > 0) {
    if (fixed_d < ds.d) throw config_error("fixed_d smaller than observed d");
    ds.d = fixed_d;
  }
  if (subsample_n > 0) {
    ds = subsample_rows(ds, subsample_n, rng::derive(problem_seed, 0x5AB5ULL));
  }
  if (scale_features) ds = scale_max_abs(ds);
  return std::make_unique<LogisticProblem>(logistic_from_dataset(ds));
}

ExperimentConfig ExperimentConfig::from_toml(const TomlLite& toml) {
  ExperimentConfig cfg;
  cfg.mode = parse_mode(toml.get_string("mode"));
  cfg.seed = static_cast<std::uint64_t>(toml.get_integer("seed", 0));
  cfg.output_path = toml.get_string("output", "");
  cfg.workers = static_cast<int>(toml.get_integer("workers", 0));

  const std::string family = toml.get_string("problem.type");
  if (family == "quadratic") {
    cfg.problem.family = ProblemSpec::Family::Quadratic;
    cfg.problem.d = static_cast<int>(toml.get_integer("problem.d"));
    cfg.problem.n = static_cast<int>(toml.get_integer("problem.n"));
    cfg.problem.sigma_sgd_sq = toml.get_number("problem.sigma_sgd_sq", 0.0);
    cfg.problem.eig_min = toml.get_number("problem.eig_min", 0.1);
    cfg.problem.eig_max = toml.get_number("problem.eig_max", 1.0);
  } else if (family == "logistic") {
    cfg.problem.family = ProblemSpec::Family::Logistic;
    cfg.problem.dataset_path = toml.get_string("problem.path");
    cfg.problem.subsample_n =
        static_cast<int>(toml.get_integer("problem.subsample_n", 0));
    cfg.problem.fixed_d = static_cast<int>(toml.get_integer("problem.fixed_d", 0));
    cfg.problem.scale_features = toml.get_bool("problem.scale_features", false);
  } else {
    throw config_error("problem.type must be 'quadratic' or 'logistic'");
  }
  cfg.problem.problem_seed = static_cast<std::uint64_t>(
      toml.get_integer("problem.seed", static_cast<long>(cfg.seed)));

  for (const auto& name : toml.get_string_array("run.strategies")) {
    cfg.strategies.push_back(OrderingStrategy::parse(name));
  }
  cfg.gammas = toml.get_number_array("run.gammas");
  cfg.epochs = toml.get_integer("run.epochs", 1);
  cfg.repeats = static_cast<int>(toml.get_integer("run.repeats", 1));
  cfg.eval_every = toml.get_integer("run.eval_every", 0);
  cfg.record_values = toml.get_bool("run.record_values", true);
  cfg.eps = toml.get_number("run.eps", 0.0);
  cfg.t_cap_epochs = toml.get_integer("run.t_cap_epochs", 0);
  cfg.num_orderings =
      static_cast<int>(toml.get_integer("run.num_orderings", 100));
  if (toml.has("run.tau_list")) cfg.tau_list = toml.get_integer_array("run.tau_list");
  if (toml.has("run.n_list")) {
    for (long n : toml.get_integer_array("run.n_list")) {
      cfg.n_list.push_back(static_cast<int>(n));
    }
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_toml(TomlLite::parse_file(path));
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw config_error("run.strategies is empty");
  if (gammas.empty()) throw config_error("run.gammas is empty");
  for (double g : gammas) {
    if (!(g > 0.0)) throw config_error("run.gammas entries must be > 0");
  }
  if (repeats < 1) throw config_error("run.repeats must be >= 1");
  if (epochs < 1) throw config_error("run.epochs must be >= 1");
  if (problem.family == ProblemSpec::Family::Quadratic) {
    if (problem.d < 1 || problem.n < 1) {
      throw config_error("problem.d and problem.n must be >= 1");
    }
  }
  switch (mode) {
    case ExperimentMode::TminVsN:
      if (!(eps > 0.0)) throw config_error("tmin_vs_n requires run.eps > 0");
      if (problem.family != ProblemSpec::Family::Quadratic && !n_list.empty()) {
        throw config_error("run.n_list only applies to quadratic problems");
      }
      break;
    case ExperimentMode::VarianceProfile:
      if (tau_list.empty()) {
        throw config_error("variance_profile requires run.tau_list");
      }
      for (std::size_t k = 0; k < tau_list.size(); ++k) {
        if (tau_list[k] < 1 || (k > 0 && tau_list[k] <= tau_list[k - 1])) {
          throw config_error("run.tau_list must be strictly ascending, >= 1");
        }
      }
      if (num_orderings < 1) throw config_error("run.num_orderings must be >= 1");
      break;
    case ExperimentMode::BoundCheck:
      if (strategies.size() != 1 || gammas.size() != 1) {
        throw config_error(
            "bound_check expects exactly one strategy and one gamma");
      }
      break;
    case ExperimentMode::Convergence:
      break;
  }
}

std::string ExperimentConfig::canonical_string() const {
  std::ostringstream os;
  os << "mode=" << mode_name(mode) << ";seed=" << seed;
  os << ";problem=";
  if (problem.family == ProblemSpec::Family::Quadratic) {
    os << "quadratic,d=" << problem.d << ",n=" << problem.n
       << ",sigma=" << format_double(problem.sigma_sgd_sq)
       << ",eig=[" << format_double(problem.eig_min) << ","
       << format_double(problem.eig_max) << "],pseed=" << problem.problem_seed;
  } else {
    os << "logistic,path=" << problem.dataset_path
       << ",sub=" << problem.subsample_n << ",fixed_d=" << problem.fixed_d
       << ",scale=" << (problem.scale_features ? 1 : 0)
       << ",pseed=" << problem.problem_seed;
  }
  os << ";strategies=";
  for (const auto& s : strategies) os << s.name() << ",";
  os << ";gammas=";
  for (double g : gammas) os << format_double(g) << ",";
  os << ";epochs=" << epochs << ";repeats=" << repeats
     << ";eps=" << format_double(eps) << ";eval_every=" << eval_every
     << ";record_values=" << (record_values ? 1 : 0)
     << ";t_cap_epochs=" << t_cap_epochs << ";num_orderings=" << num_orderings;
  os << ";tau_list=";
  for (long t : tau_list) os << t << ",";
  os << ";n_list=";
  for (int n : n_list) os << n << ",";
  return os.str();
}

std::uint64_t ExperimentConfig::config_hash() const {
  const std::string s = canonical_string();
  return rng::hash_bytes(0xC0F1DULL, s.data(), s.size());
}

}  // namespace shufflebench
