#include "shufflebench/problems.hpp"

#include <cmath>
#include <string>

#include "shufflebench/errors.hpp"
#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

void check_index(int i, int n) {
  if (i < 1 || i > n) {
    throw index_error("component index " + std::to_string(i) +
                      " outside [1, " + std::to_string(n) + "]");
  }
}

void check_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw parameter_error(std::string(what) + " has non-finite entries");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// 1 / (1 + exp(-z)) without overflow.
double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Vector FiniteSumProblem::full_gradient(const Vector& x) const {
  check_finite(x, "x");
  PairwiseVectorSum sum(d_);
  Vector g(d_);
  for (int i = 1; i <= n_; ++i) {
    component_gradient(i, x, g);
    sum.add(g);
  }
  return sum.total() / static_cast<double>(n_);
}

double FiniteSumProblem::value(const Vector& x) const {
  check_finite(x, "x");
  PairwiseScalarSum sum;
  for (int i = 1; i <= n_; ++i) sum.add(component_value(i, x));
  return sum.total() / static_cast<double>(n_);
}

double smoothness_constant(const FiniteSumProblem& p) { return p.smoothness(); }

double power_iteration_lmax(const Matrix& a, double rel_tol, int max_iters) {
  const auto d = a.rows();
  if (d == 0) return 0.0;

  // Deterministic start vector with no special alignment.
  rng::Stream stream(rng::derive(0x9D1CE5ULL, static_cast<std::uint64_t>(d)));
  Vector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v[k] = stream.next_gaussian();
  v.normalize();

  double lambda = 0.0;
  Vector av(d);
  for (int it = 0; it < max_iters; ++it) {
    av.noalias() = a * v;
    const double norm = av.norm();
    if (norm == 0.0) return 0.0;  // started in the null space of a PSD matrix
    const double next = v.dot(av);
    if (it > 0 && std::fabs(next - lambda) <= rel_tol * std::fabs(next)) {
      return next;
    }
    lambda = next;
    v = av / norm;
  }
  throw numerical_error(
      "power iteration did not converge to rel_tol within " +
          std::to_string(max_iters) + " steps",
      lambda);
}

QuadraticProblem::QuadraticProblem(Matrix a, Vector b,
                                   std::vector<Vector> shifts)
    : FiniteSumProblem(static_cast<int>(shifts.size()),
                       static_cast<int>(a.rows()), 0.0),
      a_(std::move(a)),
      b_(std::move(b)),
      shifts_(std::move(shifts)) {
  if (n_ < 1) throw parameter_error("quadratic: at least one component");
  if (a_.rows() != a_.cols()) throw parameter_error("quadratic: A not square");
  if (b_.size() != a_.rows()) {
    throw parameter_error("quadratic: b dimension mismatch");
  }
  if (!a_.isApprox(a_.transpose(), 1e-12)) {
    throw parameter_error("quadratic: A not symmetric");
  }
  for (const auto& u : shifts_) {
    if (u.size() != a_.rows()) {
      throw parameter_error("quadratic: shift dimension mismatch");
    }
  }
  double ss = 0.0;
  for (const auto& u : shifts_) ss += u.squaredNorm();
  sigma_sgd_sq_ = ss / static_cast<double>(n_);
  set_smoothness(power_iteration_lmax(a_));
}

double QuadraticProblem::component_value(int i, const Vector& x) const {
  check_index(i, n_);
  check_finite(x, "x");
  return 0.5 * x.dot(a_ * x) - b_.dot(x) +
         shifts_[static_cast<std::size_t>(i - 1)].dot(x);
}

void QuadraticProblem::component_gradient(int i, const Vector& x,
                                          Vector& out) const {
  check_index(i, n_);
  out.noalias() = a_ * x;
  out -= b_;
  out += shifts_[static_cast<std::size_t>(i - 1)];
}

Vector QuadraticProblem::minimizer() const {
  return a_.ldlt().solve(b_);
}

QuadraticProblem quadratic_new(int d, int n, double sigma_sgd_sq,
                               double eig_min, double eig_max,
                               std::uint64_t seed) {
  if (d < 1) throw parameter_error("quadratic_new: d must be >= 1");
  if (n < 1) throw parameter_error("quadratic_new: n must be >= 1");
  if (sigma_sgd_sq < 0.0) {
    throw parameter_error("quadratic_new: sigma_sgd_sq must be >= 0");
  }
  if (n == 1 && sigma_sgd_sq > 0.0) {
    throw parameter_error(
        "quadratic_new: infeasible, centering forces u_1 = 0 when n = 1");
  }
  if (!(eig_min >= 0.0) || !(eig_max >= eig_min)) {
    throw parameter_error("quadratic_new: need 0 <= eig_min <= eig_max");
  }

  rng::Stream stream(rng::derive(seed, 0xA07ADULL));

  // Haar-orthogonal Q from the QR of a Gaussian matrix, sign-fixed by the
  // diagonal of R.
  Matrix g(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) g(r, c) = stream.next_gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r_mat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (r_mat(c, c) < 0.0) q.col(c) = -q.col(c);
  }

  Vector eigs(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (eig_min > 0.0) {
      const double lo = std::log(eig_min);
      const double hi = std::log(eig_max);
      eigs[k] = std::exp(lo + (hi - lo) * stream.next_double());
    } else {
      eigs[k] = eig_max * stream.next_double();
    }
  }

  Matrix a = q * eigs.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();  // exact symmetry

  Vector b(d);
  for (Eigen::Index k = 0; k < d; ++k) b[k] = stream.next_gaussian();

  std::vector<Vector> shifts(static_cast<std::size_t>(n), Vector::Zero(d));
  if (sigma_sgd_sq > 0.0) {
    Vector mean = Vector::Zero(d);
    for (auto& u : shifts) {
      for (Eigen::Index k = 0; k < d; ++k) u[k] = stream.next_gaussian();
      mean += u;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (auto& u : shifts) {
      u -= mean;
      ss += u.squaredNorm();
    }
    ss /= static_cast<double>(n);
    if (ss <= 0.0) {
      throw numerical_error("quadratic_new: degenerate shift sample", ss);
    }
    const double scale = std::sqrt(sigma_sgd_sq / ss);
    for (auto& u : shifts) u *= scale;
  }

  return QuadraticProblem(std::move(a), std::move(b), std::move(shifts));
}

LogisticProblem::LogisticProblem(std::vector<SparseRow> rows,
                                 std::vector<int> labels, int d)
    : FiniteSumProblem(static_cast<int>(rows.size()), d, 0.0),
      rows_(std::move(rows)),
      labels_(std::move(labels)) {
  if (n_ < 1) throw parameter_error("logistic: at least one component");
  if (d < 1) throw parameter_error("logistic: d must be >= 1");
  if (labels_.size() != rows_.size()) {
    throw parameter_error("logistic: label count mismatch");
  }
  double max_norm_sq = 0.0;
  for (const auto& row : rows_) {
    int prev = 0;
    double norm_sq = 0.0;
    for (const auto& e : row) {
      if (e.index <= prev || e.index > d) {
        throw parameter_error("logistic: row indices must be increasing in [1, d]");
      }
      prev = e.index;
      norm_sq += e.value * e.value;
    }
    if (norm_sq > max_norm_sq) max_norm_sq = norm_sq;
  }
  for (int y : labels_) {
    if (y != 1 && y != -1) throw parameter_error("logistic: labels must be +-1");
  }
  set_smoothness(max_norm_sq / 4.0);
}

double LogisticProblem::margin(int i, const Vector& x) const {
  const auto& row = rows_[static_cast<std::size_t>(i - 1)];
  double dot = 0.0;
  for (const auto& e : row) dot += e.value * x[e.index - 1];
  return static_cast<double>(labels_[static_cast<std::size_t>(i - 1)]) * dot;
}

double LogisticProblem::component_value(int i, const Vector& x) const {
  check_index(i, n_);
  check_finite(x, "x");
  return softplus(-margin(i, x));
}

void LogisticProblem::component_gradient(int i, const Vector& x,
                                         Vector& out) const {
  check_index(i, n_);
  out.setZero(d_);
  const double y = static_cast<double>(labels_[static_cast<std::size_t>(i - 1)]);
  const double coeff = -y * sigmoid(-margin(i, x));
  for (const auto& e : rows_[static_cast<std::size_t>(i - 1)]) {
    out[e.index - 1] += coeff * e.value;
  }
}

const LogisticProblem::SparseRow& LogisticProblem::row(int i) const {
  check_index(i, n_);
  return rows_[static_cast<std::size_t>(i - 1)];
}

int LogisticProblem::label(int i) const {
  check_index(i, n_);
  return labels_[static_cast<std::size_t>(i - 1)];
}

LogisticProblem logistic_from_dataset(const Dataset& ds) {
  if (ds.rows.empty()) throw parameter_error("logistic_from_dataset: empty dataset");
  std::vector<LogisticProblem::SparseRow> rows;
  std::vector<int> labels;
  rows.reserve(ds.rows.size());
  labels.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    LogisticProblem::SparseRow r;
    r.reserve(row.features.size());
    for (const auto& f : row.features) r.push_back({f.index, f.value});
    rows.push_back(std::move(r));
    labels.push_back(row.label);
  }
  return LogisticProblem(std::move(rows), std::move(labels), ds.d);
}

}  // namespace shufflebench
