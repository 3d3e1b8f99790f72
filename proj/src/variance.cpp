#include "shufflebench/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shufflebench/errors.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

constexpr std::uint64_t kSampleTag = 0x5A3B1EULL;
constexpr long kEnumerationBudget = 600000;  // max permutation tuples / paths

// Per-component gradient deviations grad f_i(x) - grad f(x) at one point.
std::vector<Vector> deviations_at(const FiniteSumProblem& p, const Vector& x) {
  const Vector g_full = p.full_gradient(x);
  std::vector<Vector> dev;
  dev.reserve(static_cast<std::size_t>(p.num_components()));
  Vector g(p.dimension());
  for (int i = 1; i <= p.num_components(); ++i) {
    p.component_gradient(i, x, g);
    dev.push_back(g - g_full);
  }
  return dev;
}

// Prefix statistics of phi over windows starting at 0 (or, for deterministic
// strategies, maximized over start phases): mean[j] and sample variance for
// the window [start, start + j].
struct PrefixStats {
  std::vector<double> mean;
  std::vector<double> var;
  int num_samples = 1;
  bool exhaustive = false;
  bool deterministic = false;
};

void accumulate_prefix_phis(const std::vector<Vector>& dev,
                            std::span<const int> window, Vector& running,
                            std::vector<double>& out_phi) {
  running.setZero();
  for (std::size_t j = 0; j < window.size(); ++j) {
    running += dev[static_cast<std::size_t>(window[j] - 1)];
    out_phi[j] = running.squaredNorm();
  }
}

long factorial(int n) {
  long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Number of sequence paths for exact SGD enumeration: n + n^2 + ... + n^tau.
long sgd_enumeration_paths(int n, long tau) {
  long total = 0;
  long level = 1;
  for (long m = 0; m < tau; ++m) {
    if (level > kEnumerationBudget / n) return kEnumerationBudget + 1;
    level *= n;
    total += level;
    if (total > kEnumerationBudget) return kEnumerationBudget + 1;
  }
  return total;
}

// Exact E||S_j||^2 for i.i.d. uniform indices: depth-first over all n^(j+1)
// sequences, accumulating the squared prefix norm at every depth.
void enumerate_sgd(const std::vector<Vector>& dev, long max_tau,
                   std::vector<double>& mean) {
  const int n = static_cast<int>(dev.size());
  std::vector<double> sums(static_cast<std::size_t>(max_tau), 0.0);
  std::vector<Vector> partial(static_cast<std::size_t>(max_tau) + 1,
                              Vector::Zero(dev[0].size()));
  auto dfs = [&](auto&& self, long depth) -> void {
    if (depth == max_tau) return;
    for (int i = 0; i < n; ++i) {
      partial[static_cast<std::size_t>(depth) + 1] =
          partial[static_cast<std::size_t>(depth)] +
          dev[static_cast<std::size_t>(i)];
      sums[static_cast<std::size_t>(depth)] +=
          partial[static_cast<std::size_t>(depth) + 1].squaredNorm();
      self(self, depth + 1);
    }
  };
  dfs(dfs, 0);

  double paths = 1.0;
  for (long j = 0; j < max_tau; ++j) {
    paths *= n;
    mean[static_cast<std::size_t>(j)] =
        sums[static_cast<std::size_t>(j)] / paths;
  }
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(factorial(n)));
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Exact expectations for SS (window cycles one permutation) and RR (window
// concatenates fresh permutations), enumerating every permutation tuple.
void enumerate_permutation_strategy(const std::vector<Vector>& dev,
                                    long max_tau, bool reshuffle,
                                    std::vector<double>& mean) {
  const int n = static_cast<int>(dev.size());
  const long epochs = reshuffle ? (max_tau + n - 1) / n : 1;
  const auto perms = all_permutations(n);

  std::vector<double> sums(static_cast<std::size_t>(max_tau), 0.0);
  std::vector<int> window(static_cast<std::size_t>(max_tau));
  std::vector<double> phis(static_cast<std::size_t>(max_tau));
  Vector running(dev[0].size());

  std::vector<std::size_t> pick(static_cast<std::size_t>(epochs), 0);
  long combos = 0;
  for (;;) {
    for (long t = 0; t < max_tau; ++t) {
      const auto& perm =
          reshuffle ? perms[pick[static_cast<std::size_t>(t / n)]] : perms[pick[0]];
      window[static_cast<std::size_t>(t)] =
          perm[static_cast<std::size_t>(t % n)];
    }
    accumulate_prefix_phis(dev, window, running, phis);
    for (long j = 0; j < max_tau; ++j) {
      sums[static_cast<std::size_t>(j)] += phis[static_cast<std::size_t>(j)];
    }
    ++combos;

    // odometer over permutation tuples
    std::size_t pos = 0;
    while (pos < pick.size()) {
      if (++pick[pos] < perms.size()) break;
      pick[pos] = 0;
      ++pos;
    }
    if (pos == pick.size()) break;
  }

  for (long j = 0; j < max_tau; ++j) {
    mean[static_cast<std::size_t>(j)] =
        sums[static_cast<std::size_t>(j)] / static_cast<double>(combos);
  }
}

PrefixStats prefix_stats(const FiniteSumProblem& p,
                         const OrderingStrategy& strategy, long max_tau,
                         const std::vector<Vector>& dev, int num_orderings,
                         std::uint64_t seed) {
  const int n = p.num_components();
  PrefixStats stats;
  stats.mean.assign(static_cast<std::size_t>(max_tau), 0.0);
  stats.var.assign(static_cast<std::size_t>(max_tau), 0.0);

  if (strategy.deterministic()) {
    stats.deterministic = true;
    stats.num_samples = 1;
    // Max over window start phases s in [0, n); the value at each prefix is
    // exact, there is nothing to average.
    std::vector<double> phis(static_cast<std::size_t>(max_tau));
    Vector running(dev[0].size());
    std::vector<int> window(static_cast<std::size_t>(max_tau));
    bool any_phase = false;
    for (int s = 0; s < n; ++s) {
      if (strategy.kind == OrderingKind::Explicit) {
        const auto len = static_cast<long>(strategy.explicit_sequence.size());
        if (s + max_tau > len) break;
        for (long t = 0; t < max_tau; ++t) {
          window[static_cast<std::size_t>(t)] =
              strategy.explicit_sequence[static_cast<std::size_t>(s + t)];
        }
      } else {
        const Schedule sched(strategy, n, /*seed=*/0);
        for (long t = 0; t < max_tau; ++t) {
          window[static_cast<std::size_t>(t)] = sched.index_at(s + t);
        }
      }
      any_phase = true;
      accumulate_prefix_phis(dev, window, running, phis);
      for (long j = 0; j < max_tau; ++j) {
        auto& m = stats.mean[static_cast<std::size_t>(j)];
        m = std::max(m, phis[static_cast<std::size_t>(j)]);
      }
    }
    if (!any_phase) {
      throw sequence_length_error(
          "estimate_sigma_tau: explicit sequence shorter than the tau window");
    }
    return stats;
  }

  // Exhaustive enumeration when the case is small enough to be exact.
  if (n <= 6) {
    if (strategy.kind == OrderingKind::WithReplacement && max_tau <= 8 &&
        sgd_enumeration_paths(n, max_tau) <= kEnumerationBudget) {
      enumerate_sgd(dev, max_tau, stats.mean);
      stats.exhaustive = true;
      stats.num_samples = num_orderings;
      return stats;
    }
    if (strategy.kind == OrderingKind::SingleShuffle ||
        strategy.kind == OrderingKind::RandomReshuffle) {
      const bool reshuffle = strategy.kind == OrderingKind::RandomReshuffle;
      const long epochs = reshuffle ? (max_tau + n - 1) / n : 1;
      double tuples = 1.0;
      for (long e = 0; e < epochs; ++e) {
        tuples *= static_cast<double>(factorial(n));
      }
      if (tuples <= static_cast<double>(kEnumerationBudget)) {
        enumerate_permutation_strategy(dev, max_tau, reshuffle, stats.mean);
        stats.exhaustive = true;
        stats.num_samples = num_orderings;
        return stats;
      }
    }
  }

  // Monte Carlo over orderings, Welford per prefix length.
  stats.num_samples = num_orderings;
  std::vector<double> m2(static_cast<std::size_t>(max_tau), 0.0);
  std::vector<double> phis(static_cast<std::size_t>(max_tau));
  std::vector<int> window(static_cast<std::size_t>(max_tau));
  Vector running(dev[0].size());
  for (int s = 0; s < num_orderings; ++s) {
    const Schedule sched(strategy, n,
                         rng::derive(seed, kSampleTag,
                                     static_cast<std::uint64_t>(s)));
    ScheduleCursor cursor(sched);
    for (long t = 0; t < max_tau; ++t) {
      window[static_cast<std::size_t>(t)] = cursor.at(t);
    }
    accumulate_prefix_phis(dev, window, running, phis);
    const double count = static_cast<double>(s + 1);
    for (long j = 0; j < max_tau; ++j) {
      auto& mean = stats.mean[static_cast<std::size_t>(j)];
      const double delta = phis[static_cast<std::size_t>(j)] - mean;
      mean += delta / count;
      m2[static_cast<std::size_t>(j)] +=
          delta * (phis[static_cast<std::size_t>(j)] - mean);
    }
  }
  if (num_orderings > 1) {
    for (long j = 0; j < max_tau; ++j) {
      stats.var[static_cast<std::size_t>(j)] =
          m2[static_cast<std::size_t>(j)] /
          static_cast<double>(num_orderings - 1);
    }
  }
  return stats;
}

void validate_common(const FiniteSumProblem& p,
                     std::span<const Vector> probe_points, long tau,
                     int num_orderings) {
  if (tau < 1) throw parameter_error("estimate_sigma_tau: tau must be >= 1");
  if (num_orderings < 1) {
    throw parameter_error("estimate_sigma_tau: num_orderings must be >= 1");
  }
  if (probe_points.empty()) {
    throw parameter_error("estimate_sigma_tau: probe point set is empty");
  }
  for (const auto& x : probe_points) {
    if (x.size() != p.dimension()) {
      throw parameter_error("estimate_sigma_tau: probe point dimension mismatch");
    }
  }
}

}  // namespace

double phi(const FiniteSumProblem& p, std::span<const int> seq,
           const Vector& x, long start, long j) {
  if (start < 0 || j < 0 ||
      static_cast<std::size_t>(start + j) >= seq.size()) {
    throw index_error("phi: window [start, start + j] outside the sequence");
  }
  const Vector g_full = p.full_gradient(x);
  PairwiseVectorSum sum(p.dimension());
  Vector g(p.dimension());
  for (long t = start; t <= start + j; ++t) {
    const int idx = seq[static_cast<std::size_t>(t)];
    p.component_gradient(idx, x, g);
    sum.add(g - g_full);
  }
  return sum.total().squaredNorm();
}

double sigma_sgd_sq(const FiniteSumProblem& p,
                    std::span<const Vector> probe_points) {
  if (probe_points.empty()) {
    throw parameter_error("sigma_sgd_sq: probe point set is empty");
  }
  double best = 0.0;
  for (const auto& x : probe_points) {
    const auto dev = deviations_at(p, x);
    PairwiseScalarSum sum;
    for (const auto& v : dev) sum.add(v.squaredNorm());
    best = std::max(best, sum.total() / static_cast<double>(dev.size()));
  }
  return best;
}

SigmaTauEstimate estimate_sigma_tau(const FiniteSumProblem& p,
                                    const OrderingStrategy& strategy, long tau,
                                    std::span<const Vector> probe_points,
                                    int num_orderings, std::uint64_t seed) {
  validate_common(p, probe_points, tau, num_orderings);

  SigmaTauEstimate est;
  est.value = -1.0;
  bool first = true;
  for (const auto& x : probe_points) {
    const auto dev = deviations_at(p, x);
    const PrefixStats stats =
        prefix_stats(p, strategy, tau, dev, num_orderings, seed);
    if (first) {
      est.exhaustive = stats.exhaustive;
      est.deterministic_warning = stats.deterministic && num_orderings > 1;
      est.num_samples = stats.deterministic ? 1 : num_orderings;
      first = false;
    }
    for (long j = 0; j < tau; ++j) {
      const double m = stats.mean[static_cast<std::size_t>(j)];
      if (m > est.value) {
        est.value = m;
        est.argmax_j = j;
        est.ci_halfwidth =
            (stats.deterministic || stats.exhaustive)
                ? 0.0
                : 1.959963984540054 *
                      std::sqrt(stats.var[static_cast<std::size_t>(j)] /
                                static_cast<double>(stats.num_samples));
      }
    }
  }
  est.value = std::max(est.value, 0.0);
  return est;
}

SigmaTauEstimate sigma_epoch_sq(const FiniteSumProblem& p,
                                const OrderingStrategy& strategy,
                                std::span<const Vector> probe_points,
                                int num_orderings, std::uint64_t seed) {
  return estimate_sigma_tau(p, strategy, p.num_components(), probe_points,
                            num_orderings, seed);
}

VarianceProfile variance_profile(const FiniteSumProblem& p,
                                 const OrderingStrategy& strategy,
                                 std::span<const long> tau_list,
                                 std::span<const Vector> probe_points,
                                 int num_orderings, std::uint64_t seed) {
  if (tau_list.empty()) {
    throw parameter_error("variance_profile: tau list is empty");
  }
  if (!std::is_sorted(tau_list.begin(), tau_list.end())) {
    throw parameter_error("variance_profile: tau list must be ascending");
  }
  const long max_tau = tau_list.back();
  validate_common(p, probe_points, max_tau, num_orderings);

  // One shared pass at max_tau; per-tau values are running maxima over
  // prefixes, so the profile is monotone by construction.
  VarianceProfile profile;
  profile.strategy_id = strategy.name();
  profile.taus.assign(tau_list.begin(), tau_list.end());
  profile.sigma_hat_sq.assign(tau_list.size(), 0.0);
  profile.ci_halfwidth.assign(tau_list.size(), 0.0);
  profile.num_samples.assign(tau_list.size(), num_orderings);

  std::vector<PrefixStats> per_probe;
  per_probe.reserve(probe_points.size());
  for (const auto& x : probe_points) {
    const auto dev = deviations_at(p, x);
    per_probe.push_back(
        prefix_stats(p, strategy, max_tau, dev, num_orderings, seed));
  }
  profile.exhaustive = per_probe.front().exhaustive;
  profile.deterministic_warning =
      per_probe.front().deterministic && num_orderings > 1;
  if (per_probe.front().deterministic) {
    profile.num_samples.assign(tau_list.size(), 1);
  }

  double running_max = -1.0;
  double running_ci = 0.0;
  long next_j = 0;
  for (std::size_t k = 0; k < profile.taus.size(); ++k) {
    const long tau = profile.taus[k];
    if (tau < 1) throw parameter_error("variance_profile: tau must be >= 1");
    for (long j = next_j; j < tau; ++j) {
      for (const auto& stats : per_probe) {
        const double m = stats.mean[static_cast<std::size_t>(j)];
        if (m > running_max) {
          running_max = m;
          running_ci =
              (stats.deterministic || stats.exhaustive)
                  ? 0.0
                  : 1.959963984540054 *
                        std::sqrt(stats.var[static_cast<std::size_t>(j)] /
                                  static_cast<double>(stats.num_samples));
        }
      }
    }
    next_j = tau;
    profile.sigma_hat_sq[k] = std::max(running_max, 0.0);
    profile.ci_halfwidth[k] = running_ci;
  }
  return profile;
}

}  // namespace shufflebench
