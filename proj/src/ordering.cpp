#include "shufflebench/ordering.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "shufflebench/errors.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

// Seed-domain tags keeping the draw and per-epoch permutation streams apart.
constexpr std::uint64_t kDrawTag = 0xD12A3ULL;
constexpr std::uint64_t kEpochTag = 0xE90C4ULL;

}  // namespace

OrderingStrategy OrderingStrategy::with_replacement() {
  return {OrderingKind::WithReplacement, 1, {}};
}
OrderingStrategy OrderingStrategy::incremental() {
  return {OrderingKind::Incremental, 1, {}};
}
OrderingStrategy OrderingStrategy::single_shuffle() {
  return {OrderingKind::SingleShuffle, 1, {}};
}
OrderingStrategy OrderingStrategy::random_reshuffle() {
  return {OrderingKind::RandomReshuffle, 1, {}};
}
OrderingStrategy OrderingStrategy::single_function(int index) {
  return {OrderingKind::SingleFunction, index, {}};
}
OrderingStrategy OrderingStrategy::explicit_order(std::vector<int> sequence) {
  return {OrderingKind::Explicit, 1, std::move(sequence)};
}

OrderingStrategy OrderingStrategy::parse(const std::string& name) {
  if (name == "sgd") return with_replacement();
  if (name == "ig") return incremental();
  if (name == "ss") return single_shuffle();
  if (name == "rr") return random_reshuffle();
  if (name.rfind("single:", 0) == 0) {
    int idx = 0;
    const char* first = name.data() + 7;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec != std::errc() || ptr != last || idx < 1) {
      throw parameter_error("bad strategy '" + name + "'");
    }
    return single_function(idx);
  }
  if (name.rfind("explicit:", 0) == 0) {
    return explicit_order(load_explicit_sequence(name.substr(9)));
  }
  throw parameter_error("unknown strategy '" + name + "'");
}

std::string OrderingStrategy::name() const {
  switch (kind) {
    case OrderingKind::WithReplacement: return "sgd";
    case OrderingKind::Incremental: return "ig";
    case OrderingKind::SingleShuffle: return "ss";
    case OrderingKind::RandomReshuffle: return "rr";
    case OrderingKind::SingleFunction:
      return "single:" + std::to_string(single_index);
    case OrderingKind::Explicit:
      return "explicit[" + std::to_string(explicit_sequence.size()) + "]";
  }
  return "?";
}

std::vector<int> load_explicit_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open sequence file " + path);
  std::vector<int> seq;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t");
    int idx = 0;
    const char* first = line.data() + a;
    const char* last = line.data() + b + 1;
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec != std::errc() || ptr != last) {
      throw parameter_error("bad index at " + path + ":" +
                            std::to_string(line_no));
    }
    seq.push_back(idx);
  }
  return seq;
}

Schedule::Schedule(OrderingStrategy strategy, int n, std::uint64_t seed)
    : strategy_(std::move(strategy)), n_(n), seed_(seed) {
  if (n_ < 1) throw parameter_error("schedule: n must be >= 1");
  switch (strategy_.kind) {
    case OrderingKind::SingleFunction:
      if (strategy_.single_index < 1 || strategy_.single_index > n_) {
        throw parameter_error("schedule: single-function index out of [1, n]");
      }
      break;
    case OrderingKind::Explicit:
      for (int idx : strategy_.explicit_sequence) {
        if (idx < 1 || idx > n_) {
          throw parameter_error("schedule: explicit sequence entry out of [1, n]");
        }
      }
      break;
    case OrderingKind::SingleShuffle:
      ss_perm_ = rng::random_permutation(n_, rng::derive(seed_, kEpochTag, 0));
      break;
    default:
      break;
  }
}

int Schedule::index_at(long t) const {
  if (t < 0) throw index_error("schedule: t must be >= 0");
  const long phase = t % n_;
  switch (strategy_.kind) {
    case OrderingKind::WithReplacement:
      return 1 + static_cast<int>(rng::bounded_at(
                     rng::derive(seed_, kDrawTag),
                     static_cast<std::uint64_t>(t),
                     static_cast<std::uint64_t>(n_)));
    case OrderingKind::Incremental:
      return static_cast<int>(phase) + 1;
    case OrderingKind::SingleShuffle:
      return ss_perm_[static_cast<std::size_t>(phase)];
    case OrderingKind::RandomReshuffle: {
      const auto epoch = static_cast<std::uint64_t>(t / n_);
      const auto perm =
          rng::random_permutation(n_, rng::derive(seed_, kEpochTag, epoch));
      return perm[static_cast<std::size_t>(phase)];
    }
    case OrderingKind::SingleFunction:
      return strategy_.single_index;
    case OrderingKind::Explicit:
      if (static_cast<std::size_t>(t) >= strategy_.explicit_sequence.size()) {
        throw sequence_length_error(
            "schedule: explicit sequence exhausted at t = " +
            std::to_string(t));
      }
      return strategy_.explicit_sequence[static_cast<std::size_t>(t)];
  }
  throw parameter_error("schedule: unknown strategy kind");
}

std::vector<int> Schedule::epoch_block(long k) const {
  std::vector<int> block(static_cast<std::size_t>(n_));
  switch (strategy_.kind) {
    case OrderingKind::Incremental:
      for (int i = 0; i < n_; ++i) block[static_cast<std::size_t>(i)] = i + 1;
      return block;
    case OrderingKind::SingleShuffle:
      return ss_perm_;
    case OrderingKind::RandomReshuffle:
      return rng::random_permutation(
          n_, rng::derive(seed_, kEpochTag, static_cast<std::uint64_t>(k)));
    case OrderingKind::SingleFunction:
      for (int i = 0; i < n_; ++i) {
        block[static_cast<std::size_t>(i)] = strategy_.single_index;
      }
      return block;
    default:
      for (int i = 0; i < n_; ++i) {
        block[static_cast<std::size_t>(i)] = index_at(k * n_ + i);
      }
      return block;
  }
}

std::vector<int> Schedule::generate_sequence(long horizon) const {
  if (horizon < 0) throw parameter_error("generate_sequence: T must be >= 0");
  std::vector<int> seq(static_cast<std::size_t>(horizon) + 1);
  ScheduleCursor cursor(*this);
  for (long t = 0; t <= horizon; ++t) {
    seq[static_cast<std::size_t>(t)] = cursor.at(t);
  }
  return seq;
}

}  // namespace shufflebench
