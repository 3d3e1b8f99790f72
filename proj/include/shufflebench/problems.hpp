#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "shufflebench/libsvm.hpp"
#include "shufflebench/numeric.hpp"

namespace shufflebench {

// Finite-sum objective f(x) = (1/n) sum_i f_i(x) with per-component analytic
// gradients and a per-component smoothness constant L such that
// ||grad f_i(x) - grad f_i(y)|| <= L ||x - y|| for every component.
//
// Component indices are 1-based throughout, matching [n] = {1, ..., n}.
// Instances are immutable after construction and safe to share across
// threads.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  int num_components() const { return n_; }
  int dimension() const { return d_; }
  double smoothness() const { return smoothness_; }

  virtual double component_value(int i, const Vector& x) const = 0;
  virtual void component_gradient(int i, const Vector& x, Vector& out) const = 0;

  Vector component_gradient(int i, const Vector& x) const {
    Vector g(d_);
    component_gradient(i, x, g);
    return g;
  }

  // (1/n) sum_i grad f_i(x), accumulated pairwise in a single pass.
  Vector full_gradient(const Vector& x) const;

  // (1/n) sum_i f_i(x), pairwise.
  double value(const Vector& x) const;

 protected:
  FiniteSumProblem(int n, int d, double smoothness)
      : n_(n), d_(d), smoothness_(smoothness) {}

  void set_smoothness(double L) { smoothness_ = L; }

  int n_;
  int d_;
  double smoothness_;
};

double smoothness_constant(const FiniteSumProblem& p);

// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
// Rayleigh-quotient stopping rule. Throws numerical_error (carrying the last
// estimate) if the relative change has not fallen below rel_tol within
// max_iters steps.
double power_iteration_lmax(const Matrix& a, double rel_tol = 1e-8,
                            int max_iters = 10000);

// f_i(x) = (1/2) <A x, x> - <b, x> + <u_i, x> with A symmetric PSD and the
// shifts u_i summing to zero, so grad f(x) = A x - b and the component
// deviations grad f_i - grad f = u_i are constant in x. This makes
// sigma^2_SGD = (1/n) sum ||u_i||^2 exact by construction.
class QuadraticProblem final : public FiniteSumProblem {
 public:
  QuadraticProblem(Matrix a, Vector b, std::vector<Vector> shifts);

  using FiniteSumProblem::component_gradient;
  double component_value(int i, const Vector& x) const override;
  void component_gradient(int i, const Vector& x, Vector& out) const override;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const std::vector<Vector>& shifts() const { return shifts_; }

  // x* solving A x = b; minimizer of f for nonsingular A.
  Vector minimizer() const;

  double sigma_sgd_sq() const { return sigma_sgd_sq_; }

 private:
  Matrix a_;
  Vector b_;
  std::vector<Vector> shifts_;
  double sigma_sgd_sq_;
};

// Synthetic instance: A = Q diag(lambda) Q^T with Q Haar-orthogonal (QR of a
// Gaussian matrix) and lambda log-uniform in [eig_min, eig_max] (uniform when
// eig_min == 0); b standard Gaussian; shifts u_i Gaussian, centered, rescaled
// so (1/n) sum ||u_i||^2 equals sigma_sgd_sq exactly. Deterministic in seed.
QuadraticProblem quadratic_new(int d, int n, double sigma_sgd_sq,
                               double eig_min, double eig_max,
                               std::uint64_t seed);

// f_i(x) = log(1 + exp(-y_i <a_i, x>)) over sparse rows,
// L = max_i ||a_i||^2 / 4.
class LogisticProblem final : public FiniteSumProblem {
 public:
  struct Entry {
    int index = 0;  // 1-based
    double value = 0.0;
  };
  using SparseRow = std::vector<Entry>;

  LogisticProblem(std::vector<SparseRow> rows, std::vector<int> labels, int d);

  using FiniteSumProblem::component_gradient;
  double component_value(int i, const Vector& x) const override;
  void component_gradient(int i, const Vector& x, Vector& out) const override;

  const SparseRow& row(int i) const;
  int label(int i) const;

 private:
  double margin(int i, const Vector& x) const;  // y_i <a_i, x>

  std::vector<SparseRow> rows_;
  std::vector<int> labels_;
};

// Wires a parsed dataset into the logistic objective. Sparse rows are kept
// as-is; n = row count, d = ds.d.
LogisticProblem logistic_from_dataset(const Dataset& ds);

}  // namespace shufflebench
