#include "grip/lp.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "grip/rng.hpp"
#include "lp_grid_oracle.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using grip::ConstraintFamily;
using grip::InfeasibleError;
using grip::L1ConstrainedLp;
using grip::l1_constrained_lp;

TEST_SUITE("lp") {

TEST_CASE("interval instance is solved at its left endpoint") {
  // One column of ones against a constant response: the gradient band allows
  // xi in [1.5, 2.5], the inner-product floor caps xi at 1.75, and the
  // smallest |xi| in [1.5, 1.75] is 1.5.
  MatrixXd A = MatrixXd::Ones(4, 1);
  VectorXd g = VectorXd::Constant(4, 2.0);
  auto sol = l1_constrained_lp(A, g, 0.5, 0.5, 5.0);
  CHECK(sol.xi.size() == 1);
  CHECK(sol.xi[0] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(sol.max_violation <= 1e-7);
  CHECK(sol.iterations > 0);
}

TEST_CASE("zero response is rejected by the inner-product certificate") {
  MatrixXd A(3, 2);
  A << 1.0, 0.5, -0.5, 1.0, 0.25, -1.0;
  VectorXd g = VectorXd::Zero(3);
  try {
    l1_constrained_lp(A, g, 1.0, 0.5, 1.0);
    FAIL("expected an infeasibility error");
  } catch (const InfeasibleError& e) {
    CHECK(e.family() == ConstraintFamily::InnerProduct);
    CHECK(std::string(e.what()).find("inner-product") != std::string::npos);
  }
}

TEST_CASE("conflicting residual bounds are certified infeasible") {
  // Both observations share one regressor, so |g_1 - xi| <= 0.2 and
  // |g_2 - xi| <= 0.2 cannot hold with g = (0, 1).
  MatrixXd A = MatrixXd::Ones(2, 1);
  VectorXd g(2);
  g << 0.0, 1.0;
  try {
    l1_constrained_lp(A, g, 10.0, 0.01, 0.2);
    FAIL("expected an infeasibility error");
  } catch (const InfeasibleError& e) {
    CHECK(e.family() == ConstraintFamily::ResidualBound);
    CHECK(std::string(e.what()).find("residual sup-norm") != std::string::npos);
  }
}

TEST_CASE("zero design row beyond the residual bound is rejected early") {
  MatrixXd A(3, 1);
  A << 1.0, 0.0, -2.0;
  VectorXd g(3);
  g << 0.5, 3.0, 1.0;
  try {
    l1_constrained_lp(A, g, 5.0, 0.1, 1.0);
    FAIL("expected an infeasibility error");
  } catch (const InfeasibleError& e) {
    CHECK(e.family() == ConstraintFamily::ResidualBound);
    CHECK(std::string(e.what()).find("observation 2") != std::string::npos);
  }
}

TEST_CASE("matches lattice search on randomized small instances") {
  grip::RngStream stream(20260825);
  int two_col = 0;
  for (int rep = 0; rep < 50; ++rep) {
    CAPTURE(rep);
    auto inst = griptest::make_lp_instance(stream);
    REQUIRE(griptest::grid_feasible(inst, inst.probe));
    if (inst.A.cols() == 2) ++two_col;

    auto sol = l1_constrained_lp(inst.A, inst.g, inst.eta, inst.etabar,
                                 inst.mu);
    CHECK(griptest::instance_violation(inst, sol.xi) <= 1e-7);
    CHECK(sol.objective <= inst.probe.lpNorm<1>() + 2e-6);

    const double oracle = griptest::grid_optimum(inst);
    CHECK(std::abs(sol.objective - oracle) <= 2e-3);
  }
  CHECK(two_col > 5);  // the draw covers both column counts
}

TEST_CASE("tall sparse recovery instance stays feasible at scale") {
  grip::RngStream stream(77);
  const int n = 50, m = 120;
  MatrixXd A(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = stream.normal();
  VectorXd xi_true = VectorXd::Zero(m);
  xi_true[3] = 1.0;
  xi_true[40] = -0.8;
  xi_true[111] = 0.5;
  VectorXd noise(n);
  for (int i = 0; i < n; ++i) noise[i] = 0.5 * stream.normal();
  VectorXd g = A * xi_true + noise;

  const double eta =
      1.5 * (A.transpose() * noise / n).lpNorm<Eigen::Infinity>() + 0.05;
  const double mu = 1.5 * noise.lpNorm<Eigen::Infinity>() + 0.05;
  const double etabar = 0.5 * g.dot(noise) / n;
  REQUIRE(etabar > 0.0);

  auto sol = l1_constrained_lp(A, g, eta, etabar, mu);
  CHECK(sol.max_violation <= 1e-7);
  CHECK(sol.objective <= xi_true.lpNorm<1>() + 2e-6);
  CHECK(sol.iterations < 120);

  griptest::LpInstance inst{A, g, eta, etabar, mu, xi_true};
  CHECK(std::abs(griptest::instance_violation(inst, sol.xi) -
                 sol.max_violation) <= 1e-10);
}

TEST_CASE("solver object is reusable and deterministic") {
  grip::RngStream stream(5);
  MatrixXd A(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) A(i, j) = stream.normal();
  L1ConstrainedLp solver(A);

  // Gradient band tighter than the zero point forces a nonzero solution.
  auto run = [&](const VectorXd& g) {
    const double eta =
        0.25 * (A.transpose() * g / 6).lpNorm<Eigen::Infinity>();
    const double etabar = 0.1 * g.squaredNorm() / 6;
    const double mu = g.lpNorm<Eigen::Infinity>() + 1.0;
    return solver.solve(g, eta, etabar, mu);
  };
  VectorXd g1 = A * VectorXd::Constant(2, 1.0);
  VectorXd g2 = A * VectorXd::Constant(2, -0.5);
  auto s1 = run(g1);
  auto s2 = run(g2);
  CHECK(s1.max_violation <= 1e-7);
  CHECK(s2.max_violation <= 1e-7);
  CHECK(s1.objective > 0.1);
  CHECK(s2.objective > 0.05);

  auto s1_again = run(g1);
  CHECK((s1_again.xi - s1.xi).norm() == 0.0);
}

TEST_CASE("parameter validation") {
  MatrixXd A = MatrixXd::Ones(4, 1);
  VectorXd g = VectorXd::Constant(4, 2.0);
  CHECK_THROWS_AS(l1_constrained_lp(A, VectorXd::Zero(3), 0.5, 0.5, 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(l1_constrained_lp(A, g, -0.1, 0.5, 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(l1_constrained_lp(A, g, 0.5, 0.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(l1_constrained_lp(A, g, 0.5, 0.5, 5.0, -1e-7),
                  std::invalid_argument);
  MatrixXd with_dead_column(4, 2);
  with_dead_column << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(L1ConstrainedLp{with_dead_column}, std::invalid_argument);
  CHECK_THROWS_AS(L1ConstrainedLp{MatrixXd(0, 0)}, std::invalid_argument);
}

}  // TEST_SUITE
