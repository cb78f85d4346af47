#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "poissparse/rng.hpp"
#include "poissparse/solver.hpp"

using namespace psr;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("project_nonneg_l1 examples") {
  CHECK(project_nonneg_l1(vec({0.5, 0.3}), 1.0).isApprox(vec({0.5, 0.3})));
  CHECK(project_nonneg_l1(vec({2, 0}), 1.0).isApprox(vec({1, 0})));
  CHECK(project_nonneg_l1(vec({1, 1}), 1.0).isApprox(vec({0.5, 0.5})));
}

TEST_CASE("project_simplex examples") {
  CHECK(project_simplex(vec({1, 0}), 1.0).isApprox(vec({1, 0})));
  CHECK(project_simplex(vec({0, 0}), 1.0).isApprox(vec({0.5, 0.5})));
  CHECK(project_simplex(vec({3, 1}), 2.0).isApprox(vec({2, 0})));
}

TEST_CASE("projections match the active-set oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    int p = 1 + int(rng.next_u64() % 4);
    double s = rng.uniform(0.2, 3.0);
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) v[i] = rng.uniform(-2.0, 2.0);
    Eigen::VectorXd got_le = project_nonneg_l1(v, s);
    Eigen::VectorXd ref_le = oracle::project_active_set(v, s, false);
    CHECK((got_le - ref_le).norm() < 1e-8);
    Eigen::VectorXd got_eq = project_simplex(v, s);
    Eigen::VectorXd ref_eq = oracle::project_active_set(v, s, true);
    CHECK((got_eq - ref_eq).norm() < 1e-8);
  }
}

TEST_CASE("projections are idempotent") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v(6);
    for (int i = 0; i < 6; ++i) v[i] = rng.uniform(-3.0, 3.0);
    Eigen::VectorXd once = project_nonneg_l1(v, 1.5);
    CHECK((project_nonneg_l1(once, 1.5) - once).norm() < 1e-12);
    Eigen::VectorXd once_eq = project_simplex(v, 1.5);
    CHECK((project_simplex(once_eq, 1.5) - once_eq).norm() < 1e-12);
  }
}

TEST_CASE("1-D Poisson likelihood has the closed-form minimizer") {
  AffineRateModel m(vec({1}), Eigen::MatrixXd::Ones(1, 1));
  ObservationSet y(vec({3}));
  ConstraintSet cs;
  cs.amplitude = 10.0;
  SolveResult r = minimize(Loss::PoissonNll, m, y, cs);
  CHECK(std::fabs(r.w_hat.values[0] - 2.0) < 1e-6);
  SolveResult rl = minimize(Loss::RescaledLasso, m, y, cs);
  CHECK(std::fabs(rl.w_hat.values[0] - 2.0) < 1e-6);
}

TEST_CASE("least squares at an attainable fit dominates the truth") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  AffineRateModel m(vec({1, 1, 1}), a);
  Eigen::VectorXd w_star = vec({1, 2});
  Eigen::VectorXd lam = vec({2, 3, 4});
  ObservationSet y(lam);
  ConstraintSet cs;
  cs.amplitude = 5.0;
  SolveResult r = minimize(Loss::LeastSquares, m, y, cs);
  double obj_truth = (lam - lam).squaredNorm();
  CHECK(r.objective <= obj_truth + 1e-9);
  CHECK(r.objective < 1e-9);  // exact fit attainable
}

TEST_CASE("solutions agree with the dense grid oracle on tiny instances") {
  Rng rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    int p = 1 + int(rng.next_u64() % 3);
    int n = 2 + int(rng.next_u64() % 3);
    Eigen::MatrixXd a(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) a(i, j) = rng.uniform(0.2, 1.0);
    AffineRateModel m(Eigen::VectorXd::Constant(n, rng.uniform(0.5, 2.0)), a);
    Eigen::VectorXd yv(n);
    for (int i = 0; i < n; ++i) yv[i] = double(rng.poisson(4.0));
    ObservationSet y(yv);
    double s = rng.uniform(1.0, 4.0);
    ConstraintSet cs;
    cs.amplitude = s;
    for (Loss loss : {Loss::PoissonNll, Loss::LeastSquares}) {
      SolveResult r = minimize(loss, m, y, cs);
      Eigen::VectorXd ref = oracle::grid_minimize(
          [&](const Eigen::VectorXd& w) {
            Eigen::VectorXd lam = m.base_rates + m.matrix * w;
            if ((lam.array() <= 0.0).any() && loss == Loss::PoissonNll)
              return 1e300;
            return evaluate(loss, m, y, w).value;
          },
          p, s);
      CHECK((r.w_hat.values - ref).norm() < 1e-4);
    }
  }
}

TEST_CASE("iterates stay feasible and the objective never increases") {
  Rng rng(8);
  Eigen::MatrixXd a(6, 4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(0.0, 1.0);
  AffineRateModel m(Eigen::VectorXd::Constant(6, 2.0), a);
  Eigen::VectorXd yv(6);
  for (int i = 0; i < 6; ++i) yv[i] = double(rng.poisson(5.0));
  ObservationSet y(yv);
  for (ConstraintMode mode : {ConstraintMode::SumAtMost, ConstraintMode::SumEquals}) {
    ConstraintSet cs;
    cs.amplitude = 3.0;
    cs.mode = mode;
    SolveResult r = minimize(Loss::PoissonNll, m, y, cs);
    CHECK((r.w_hat.values.array() >= 0.0).all());
    if (mode == ConstraintMode::SumAtMost)
      CHECK(r.w_hat.l1() <= 3.0 + 1e-9);
    else
      CHECK(r.w_hat.l1() == doctest::Approx(3.0).epsilon(1e-9));
    // solver reports an objective no worse than the start (center)
    Eigen::VectorXd center = Eigen::VectorXd::Constant(4, 3.0 / 4.0);
    CHECK(r.objective <= poisson_nll(m, y, center).value + 1e-12);
  }
}

TEST_CASE("infeasible explicit start is rejected") {
  AffineRateModel m(vec({1}), Eigen::MatrixXd::Ones(1, 1));
  ObservationSet y(vec({1}));
  ConstraintSet cs;
  cs.amplitude = 1.0;
  CHECK_THROWS_AS(minimize(Loss::PoissonNll, m, y, cs, {},
                           ParamVector(vec({2.0}))),
                  std::invalid_argument);
}

TEST_CASE("threshold_support is strict") {
  ParamVector w(vec({0.5, 1e-6}));
  auto s1 = threshold_support(w, 1e-4);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0] == 0);
  ParamVector w2(vec({0.1, 0.1}));
  CHECK(threshold_support(w2, 0.1).empty());
  ParamVector w3(vec({0.0, 0.2}));
  auto s3 = threshold_support(w3, 0.0);
  REQUIRE(s3.size() == 1);
  CHECK(s3[0] == 1);
}

TEST_CASE("rescaled lasso warm start from least squares runs") {
  Rng rng(44);
  Eigen::MatrixXd a(8, 3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.uniform(0.1, 1.0);
  AffineRateModel m(Eigen::VectorXd::Constant(8, 3.0), a);
  Eigen::VectorXd yv(8);
  for (int i = 0; i < 8; ++i) yv[i] = double(rng.poisson(6.0));
  ObservationSet y(yv);
  ConstraintSet cs;
  cs.amplitude = 4.0;
  SolverConfig cfg;
  cfg.warm_start_from_ls = true;
  SolveResult r = minimize(Loss::RescaledLasso, m, y, cs, cfg);
  CHECK((r.w_hat.values.array() >= 0.0).all());
  CHECK(r.w_hat.l1() <= 4.0 + 1e-9);
}
