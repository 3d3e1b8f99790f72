#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shufflebench {

// The index-selection rules covered by the SGD loop: with-replacement
// sampling, the cyclic incremental rule i_t = t mod n + 1, single shuffle
// (one permutation reused every epoch), random reshuffling (a fresh
// permutation per epoch), a constant single index, and fully explicit
// user-provided sequences.
enum class OrderingKind {
  WithReplacement,
  Incremental,
  SingleShuffle,
  RandomReshuffle,
  SingleFunction,
  Explicit,
};

struct OrderingStrategy {
  OrderingKind kind = OrderingKind::WithReplacement;
  int single_index = 1;                 // SingleFunction target, 1-based
  std::vector<int> explicit_sequence;   // 1-based entries

  static OrderingStrategy with_replacement();
  static OrderingStrategy incremental();
  static OrderingStrategy single_shuffle();
  static OrderingStrategy random_reshuffle();
  static OrderingStrategy single_function(int index);
  static OrderingStrategy explicit_order(std::vector<int> sequence);

  // Config names: "sgd", "ig", "ss", "rr", "single:<j>", "explicit:<path>"
  // (the file holds one 1-based index per line, blank lines ignored).
  static OrderingStrategy parse(const std::string& name);

  // Canonical descriptor used in CSV output and cell seeding.
  std::string name() const;

  // True when the produced sequence does not depend on the seed.
  bool deterministic() const {
    return kind == OrderingKind::Incremental ||
           kind == OrderingKind::SingleFunction ||
           kind == OrderingKind::Explicit;
  }
};

std::vector<int> load_explicit_sequence(const std::string& path);

// Immutable index source: index_at(t) is a pure function of
// (strategy, seed, n, t), so sequences are reproducible at arbitrary
// positions and safe for concurrent reads.
class Schedule {
 public:
  Schedule(OrderingStrategy strategy, int n, std::uint64_t seed);

  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const OrderingStrategy& strategy() const { return strategy_; }

  // 1-based component index at iteration t >= 0. O(n) for the permutation
  // variants (the epoch permutation is rebuilt); use ScheduleCursor in loops.
  int index_at(long t) const;

  // The n indices of epoch k, i.e. iterations [k n, (k+1) n).
  std::vector<int> epoch_block(long k) const;

  // (index_at(0), ..., index_at(T)): T + 1 entries.
  std::vector<int> generate_sequence(long horizon) const;

 private:
  OrderingStrategy strategy_;
  int n_;
  std::uint64_t seed_;
  std::vector<int> ss_perm_;  // SingleShuffle: fixed at construction
};

// Reader over a schedule that caches the current epoch permutation for
// RandomReshuffle, whose index_at is O(n); every other variant is O(1) and
// passes through.
class ScheduleCursor {
 public:
  explicit ScheduleCursor(const Schedule& schedule)
      : schedule_(&schedule),
        caching_(schedule.strategy().kind == OrderingKind::RandomReshuffle) {}

  int at(long t) {
    if (!caching_) return schedule_->index_at(t);
    const long n = schedule_->n();
    const long epoch = t / n;
    if (epoch != cached_epoch_) {
      block_ = schedule_->epoch_block(epoch);
      cached_epoch_ = epoch;
    }
    return block_[static_cast<std::size_t>(t % n)];
  }

 private:
  const Schedule* schedule_;
  bool caching_;
  long cached_epoch_ = -1;
  std::vector<int> block_;
};

inline Schedule make_schedule(OrderingStrategy strategy, int n,
                              std::uint64_t seed) {
  return Schedule(std::move(strategy), n, seed);
}

}  // namespace shufflebench
