#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

namespace shufflebench {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Pairwise (binary-counter) vector summation: O(log n) working storage,
// error growth O(log n) instead of O(n) for a running sum.
class PairwiseVectorSum {
 public:
  explicit PairwiseVectorSum(Eigen::Index dim) : dim_(dim) {}

  void add(const Vector& v) {
    Vector carry = v;
    std::size_t level = 0;
    while (level < levels_.size() && occupied_[level]) {
      carry += levels_[level];
      occupied_[level] = false;
      ++level;
    }
    if (level == levels_.size()) {
      levels_.push_back(carry);
      occupied_.push_back(true);
    } else {
      levels_[level] = carry;
      occupied_[level] = true;
    }
    ++count_;
  }

  std::size_t count() const { return count_; }

  Vector total() const {
    Vector sum = Vector::Zero(dim_);
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      if (occupied_[level]) sum += levels_[level];
    }
    return sum;
  }

 private:
  Eigen::Index dim_;
  std::vector<Vector> levels_;
  std::vector<bool> occupied_;
  std::size_t count_ = 0;
};

// Same idea for scalars.
class PairwiseScalarSum {
 public:
  void add(double v) {
    std::size_t level = 0;
    while (level < levels_.size() && occupied_[level]) {
      v += levels_[level];
      occupied_[level] = false;
      ++level;
    }
    if (level == levels_.size()) {
      levels_.push_back(v);
      occupied_.push_back(true);
    } else {
      levels_[level] = v;
      occupied_[level] = true;
    }
    ++count_;
  }

  std::size_t count() const { return count_; }

  double total() const {
    double sum = 0.0;
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      if (occupied_[level]) sum += levels_[level];
    }
    return sum;
  }

 private:
  std::vector<double> levels_;
  std::vector<bool> occupied_;
  std::size_t count_ = 0;
};

// Sample mean and 95% normal-approximation confidence half-width.
struct MeanCi {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t count = 0;
};

inline MeanCi mean_ci95(const std::vector<double>& samples) {
  MeanCi out;
  out.count = samples.size();
  if (samples.empty()) return out;
  PairwiseScalarSum sum;
  for (double s : samples) sum.add(s);
  out.mean = sum.total() / static_cast<double>(samples.size());
  if (samples.size() < 2) return out;
  double ss = 0.0;
  for (double s : samples) ss += (s - out.mean) * (s - out.mean);
  const double var = ss / static_cast<double>(samples.size() - 1);
  out.ci_halfwidth =
      1.959963984540054 * std::sqrt(var / static_cast<double>(samples.size()));
  return out;
}

}  // namespace shufflebench
