#include "shufflebench/problems.hpp"

#include <doctest.h>

#include <cmath>

#include "shufflebench/errors.hpp"
#include "test_support.hpp"

using namespace shufflebench;
namespace ts = shufflebench::testing;

TEST_CASE("quadratic_new hits the requested variance exactly") {
  const auto p = quadratic_new(100, 50, 0.01, 0.1, 1.0, 42);
  CHECK(p.num_components() == 50);
  CHECK(p.dimension() == 100);
  CHECK(p.sigma_sgd_sq() == doctest::Approx(0.01).epsilon(1e-12));

  // direct recomputation from the returned shifts
  double ss = 0.0;
  Vector total = Vector::Zero(100);
  for (const auto& u : p.shifts()) {
    ss += u.squaredNorm();
    total += u;
  }
  CHECK(ss / 50.0 == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(total.norm() <= 1e-12);
}

TEST_CASE("quadratic_new with zero variance degenerates to gradient descent") {
  const auto p = quadratic_new(3, 2, 0.0, 0.1, 1.0, 7);
  for (const auto& u : p.shifts()) CHECK(u.norm() == 0.0);
  const Vector x = ts::random_point(3, 1);
  CHECK((p.component_gradient(1, x) - p.component_gradient(2, x)).norm() ==
        0.0);
}

TEST_CASE("quadratic_new shift sums recomputed directly (d=2, n=4, seed=7)") {
  const auto p = quadratic_new(2, 4, 1.0, 0.1, 1.0, 7);
  Vector sum = Vector::Zero(2);
  double ss = 0.0;
  for (const auto& u : p.shifts()) {
    sum += u;
    ss += u.squaredNorm();
  }
  CHECK(ss / 4.0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sum.norm() <= 1e-12);
}

TEST_CASE("quadratic_new rejects infeasible parameters") {
  CHECK_THROWS_AS(quadratic_new(3, 1, 0.5, 0.1, 1.0, 0), parameter_error);
  CHECK_THROWS_AS(quadratic_new(3, 4, 0.5, -1.0, 1.0, 0), parameter_error);
  CHECK_THROWS_AS(quadratic_new(3, 4, 0.5, 2.0, 1.0, 0), parameter_error);
  CHECK_THROWS_AS(quadratic_new(0, 4, 0.5, 0.1, 1.0, 0), parameter_error);
  CHECK_THROWS_AS(quadratic_new(3, 4, -0.1, 0.1, 1.0, 0), parameter_error);
}

TEST_CASE("quadratic_new is deterministic in the seed") {
  const auto p1 = quadratic_new(5, 6, 0.3, 0.1, 1.0, 99);
  const auto p2 = quadratic_new(5, 6, 0.3, 0.1, 1.0, 99);
  CHECK(p1.a() == p2.a());
  CHECK(p1.b() == p2.b());
  for (int i = 0; i < 6; ++i) {
    CHECK(p1.shifts()[i] == p2.shifts()[i]);
  }
}

TEST_CASE("quadratic A is symmetric PSD with eigenvalues in range") {
  const auto p = quadratic_new(8, 4, 0.1, 0.2, 0.9, 3);
  CHECK(p.a() == p.a().transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(p.a());
  CHECK(solver.eigenvalues().minCoeff() >= 0.2 - 1e-9);
  CHECK(solver.eigenvalues().maxCoeff() <= 0.9 + 1e-9);
}

TEST_CASE("quadratic component gradient is A x - b + u_i") {
  const auto p = quadratic_new(6, 3, 0.5, 0.1, 1.0, 11);
  const Vector x = ts::random_point(6, 2);
  for (int i = 1; i <= 3; ++i) {
    const Vector expected = p.a() * x - p.b() + p.shifts()[i - 1];
    CHECK((p.component_gradient(i, x) - expected).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(p.component_gradient(0, x), index_error);
  CHECK_THROWS_AS(p.component_gradient(4, x), index_error);
}

TEST_CASE("quadratic full gradient equals A x - b (shifts cancel)") {
  const auto p = quadratic_new(10, 7, 0.2, 0.1, 1.0, 5);
  for (int k = 0; k < 5; ++k) {
    const Vector x = ts::random_point(10, 100 + k);
    const Vector expected = p.a() * x - p.b();
    const Vector g = p.full_gradient(x);
    CHECK((g - expected).norm() <= 1e-10 * (1.0 + g.norm()));
  }
}

TEST_CASE("mean-of-components identity at random points") {
  const auto quad = quadratic_new(5, 9, 0.4, 0.1, 1.0, 21);
  const auto logi = ts::toy_logistic(9, 5, 22);
  for (const FiniteSumProblem* p :
       {static_cast<const FiniteSumProblem*>(&quad),
        static_cast<const FiniteSumProblem*>(&logi)}) {
    for (int k = 0; k < 50; ++k) {
      const Vector x = ts::random_point(5, 500 + k);
      Vector mean = Vector::Zero(5);
      for (int i = 1; i <= p->num_components(); ++i) {
        mean += p->component_gradient(i, x);
      }
      mean /= p->num_components();
      const Vector g = p->full_gradient(x);
      CHECK((g - mean).norm() <= 1e-10 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("quadratic deviations are constant in x") {
  const auto p = quadratic_new(4, 5, 0.7, 0.1, 1.0, 31);
  for (int k = 0; k < 10; ++k) {
    const Vector x = ts::random_point(4, 900 + k, 3.0);
    const Vector g = p.full_gradient(x);
    for (int i = 1; i <= 5; ++i) {
      const Vector dev = p.component_gradient(i, x) - g;
      CHECK((dev - p.shifts()[i - 1]).norm() <= 1e-12 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("smoothness sampling bound holds on random pairs") {
  const auto quad = quadratic_new(6, 4, 0.3, 0.1, 1.0, 41);
  const auto logi = ts::toy_logistic(6, 6, 42);
  for (const FiniteSumProblem* p :
       {static_cast<const FiniteSumProblem*>(&quad),
        static_cast<const FiniteSumProblem*>(&logi)}) {
    const double L = p->smoothness();
    for (int k = 0; k < 1000; ++k) {
      const Vector x = ts::random_point(6, 2000 + k, 2.0);
      const Vector y = ts::random_point(6, 7000 + k, 2.0);
      const int i = 1 + k % p->num_components();
      const double lhs =
          (p->component_gradient(i, x) - p->component_gradient(i, y)).norm();
      CHECK(lhs <= (1.0 + 1e-8) * L * (x - y).norm());
    }
  }
}

TEST_CASE("power iteration matches the dense eigensolver oracle") {
  const auto p = quadratic_new(10, 3, 0.1, 0.05, 2.0, 51);
  const double oracle = ts::dense_lmax(p.a());
  CHECK(power_iteration_lmax(p.a()) == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(p.smoothness() == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("power iteration on diag(1,4) returns 4") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 4.0;
  CHECK(power_iteration_lmax(a) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("power iteration reports non-convergence with a partial estimate") {
  const auto p = quadratic_new(12, 3, 0.0, 0.5, 1.0, 61);
  try {
    power_iteration_lmax(p.a(), 1e-16, 2);
    FAIL("expected numerical_error");
  } catch (const numerical_error& e) {
    CHECK(e.partial_estimate() > 0.0);
    CHECK(e.partial_estimate() <= 1.0 + 1e-6);
  }
}

TEST_CASE("logistic single row (3,4) has L = 25/4") {
  LogisticProblem p({{{1, 3.0}, {2, 4.0}}}, {1}, 2);
  CHECK(p.smoothness() == doctest::Approx(25.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("logistic zero feature row has zero gradient everywhere") {
  LogisticProblem p({{}, {{1, 1.0}}}, {1, -1}, 2);
  const Vector x = ts::random_point(2, 3);
  CHECK(p.component_gradient(1, x).norm() == 0.0);
  CHECK(p.component_value(1, x) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("logistic gradient matches central finite differences") {
  const auto p = ts::toy_logistic(8, 5, 77);
  for (int k = 0; k < 20; ++k) {
    const Vector x = ts::random_point(5, 4000 + k, 2.0);
    const int i = 1 + k % 8;
    const Vector g = p.component_gradient(i, x);
    const Vector fd = ts::fd_component_gradient(p, i, x);
    CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
  }
}

TEST_CASE("quadratic value/gradient consistency via finite differences") {
  const auto p = quadratic_new(4, 3, 0.2, 0.1, 1.0, 81);
  for (int k = 0; k < 10; ++k) {
    const Vector x = ts::random_point(4, 6000 + k);
    const int i = 1 + k % 3;
    const Vector g = p.component_gradient(i, x);
    const Vector fd = ts::fd_component_gradient(p, i, x);
    CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
  }
}

TEST_CASE("logistic full gradient agrees with mean of finite differences") {
  const auto p = ts::toy_logistic(4, 3, 91);
  const Vector x = ts::random_point(3, 8);
  Vector fd_mean = Vector::Zero(3);
  for (int i = 1; i <= 4; ++i) fd_mean += ts::fd_component_gradient(p, i, x);
  fd_mean /= 4.0;
  const Vector g = p.full_gradient(x);
  CHECK((g - fd_mean).norm() <= 1e-5 * (1.0 + g.norm()));
}

TEST_CASE("logistic_from_dataset wires dimensions and the value at zero") {
  const Dataset ds = parse_libsvm(std::string("+1 1:1.5 3:-2\n-1 2:0.5\n"));
  const auto p = logistic_from_dataset(ds);
  CHECK(p.num_components() == 2);
  CHECK(p.dimension() == 3);
  // zero margin: every component is log 2 at x = 0
  CHECK(p.value(Vector::Zero(3)) == doctest::Approx(std::log(2.0)));

  CHECK_THROWS_AS(logistic_from_dataset(Dataset{}), parameter_error);
}

TEST_CASE("logistic value and gradient stay finite at large points") {
  const auto p = ts::toy_logistic(10, 4, 101);
  Vector x = Vector::Zero(4);
  CHECK(std::isfinite(p.value(x)));
  for (int k = 0; k < 4; ++k) x[k] = (k % 2 == 0) ? 10.0 : -10.0;
  CHECK(std::isfinite(p.value(x)));
  for (int i = 1; i <= 10; ++i) {
    CHECK(p.component_gradient(i, x).allFinite());
  }
}

TEST_CASE("identical components make the full gradient equal each component") {
  std::vector<Vector> shifts(4, Vector::Zero(3));
  Matrix a = Matrix::Identity(3, 3);
  const QuadraticProblem p(a, Vector::Ones(3), std::move(shifts));
  const Vector x = ts::random_point(3, 6);
  CHECK((p.full_gradient(x) - p.component_gradient(1, x)).norm() <= 1e-14);
}
