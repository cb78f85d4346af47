#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "poissparse/model.hpp"
#include "poissparse/rng.hpp"

using namespace psr;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::MatrixXd mat(Eigen::Index n, Eigen::Index p,
                    std::initializer_list<double> v) {
  Eigen::MatrixXd out(n, p);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) out(i, j) = *it++;
  return out;
}

}  // namespace

TEST_CASE("rates basics") {
  CHECK(rates(AffineRateModel(vec({1}), mat(1, 1, {0})), ParamVector(vec({5})))[0] ==
        doctest::Approx(1.0));
  Eigen::VectorXd r = rates(AffineRateModel(vec({1, 2}), mat(2, 2, {1, 0, 0, 1})),
                            ParamVector(vec({3, 4})));
  CHECK(r[0] == doctest::Approx(4.0));
  CHECK(r[1] == doctest::Approx(6.0));
  // quenching-style negative coefficients
  CHECK(rates(AffineRateModel(vec({10}), mat(1, 2, {-1, -2})),
              ParamVector(vec({1, 0})))[0] == doctest::Approx(9.0));
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(AffineRateModel(vec({-1}), mat(1, 1, {0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(AffineRateModel(vec({1, 2}), mat(1, 1, {0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParamVector(vec({1, -0.5})), std::invalid_argument);
  CHECK_THROWS_AS(ObservationSet(vec({1.5})), std::invalid_argument);
  CHECK_THROWS_AS(ObservationSet(vec({-1})), std::invalid_argument);
}

TEST_CASE("poisson_nll values and gradient") {
  AffineRateModel m(vec({1}), mat(1, 1, {1}));
  auto e1 = poisson_nll(m, ObservationSet(vec({0})), vec({0}));
  CHECK(e1.value == doctest::Approx(1.0));
  CHECK(e1.gradient[0] == doctest::Approx(1.0));

  auto e2 = poisson_nll(m, ObservationSet(vec({3})), vec({2}));
  CHECK(e2.value == doctest::Approx(-3.0 * std::log(3.0) + 3.0));
  CHECK(e2.gradient[0] == doctest::Approx(0.0));

  // stationary at exact fit: y_i = lambda_i(w)
  AffineRateModel m2(vec({1, 2}), mat(2, 2, {1, 0.5, 0.5, 1}));
  Eigen::VectorXd w = vec({2, 4});
  Eigen::VectorXd lam = rates(m2, w);
  CHECK(lam[0] == doctest::Approx(5.0));
  CHECK(lam[1] == doctest::Approx(7.0));
  auto e3 = poisson_nll(m2, ObservationSet(vec({lam[0], lam[1]})), w);
  CHECK(e3.gradient.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("poisson_nll domain error carries index") {
  AffineRateModel m(vec({0, 1}), mat(2, 1, {0, 1}));
  try {
    poisson_nll(m, ObservationSet(vec({1, 1})), vec({0}));
    CHECK(false);
  } catch (const RateDomainError& e) {
    CHECK(e.index == 0);
  }
}

TEST_CASE("rescaled_lasso values") {
  AffineRateModel m(vec({1}), mat(1, 1, {1}));
  CHECK(rescaled_lasso_loss(m, ObservationSet(vec({3})), vec({2})).value ==
        doctest::Approx(0.0));
  CHECK(rescaled_lasso_loss(m, ObservationSet(vec({3})), vec({0})).value ==
        doctest::Approx(4.0));
  // perfect fit has zero gradient too
  auto e = rescaled_lasso_loss(m, ObservationSet(vec({3})), vec({2}));
  CHECK(e.gradient[0] == doctest::Approx(0.0));
}

TEST_CASE("least_squares values") {
  AffineRateModel m0(vec({0}), mat(1, 1, {1}));
  auto e = least_squares_loss(m0, ObservationSet(vec({2})), vec({0}));
  CHECK(e.value == doctest::Approx(4.0));
  CHECK(e.gradient[0] == doctest::Approx(-4.0));
  AffineRateModel m1(vec({1, 1}), mat(2, 1, {1, 1}));
  CHECK(least_squares_loss(m1, ObservationSet(vec({2, 0})), vec({0})).value ==
        doctest::Approx(1.0));
}

TEST_CASE("rate_summary values") {
  AffineRateModel m(vec({1, 1, 1}), mat(3, 1, {0, 1, 3}));
  RateSummary s = rate_summary(m, ParamVector(vec({1})));
  // rates 1, 2, 4
  CHECK(s.lambda_min == doctest::Approx(1.0));
  CHECK(s.lambda_harmonic == doctest::Approx(12.0 / 7.0));
  // worst-case lambda_max: max base + a_max * s = 1 + 3*1
  CHECK(s.lambda_max == doctest::Approx(4.0));
  CHECK(s.a_max == doctest::Approx(3.0));
  CHECK(s.a_min == doctest::Approx(0.0));

  AffineRateModel mc(vec({2, 2}), mat(2, 1, {0.5, 0.5}));
  RateSummary sc = rate_summary(mc, ParamVector(vec({2})));
  CHECK(sc.lambda_harmonic == doctest::Approx(3.0));  // all rates equal 3
  AffineRateModel m13(vec({1, 3}), mat(2, 1, {0, 0}));
  CHECK(rate_summary(m13, ParamVector(vec({1}))).lambda_harmonic ==
        doctest::Approx(1.5));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 5, p = 4;
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.uniform(0.1, 1.0);
    Eigen::VectorXd base = Eigen::VectorXd::Constant(n, rng.uniform(0.5, 2.0));
    AffineRateModel m(base, a);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv[i] = double(rng.poisson(3.0));
    ObservationSet y(yv);
    Eigen::VectorXd w(p);
    for (Eigen::Index j = 0; j < p; ++j) w[j] = rng.uniform(0.2, 1.5);

    for (Loss loss : {Loss::PoissonNll, Loss::RescaledLasso, Loss::LeastSquares}) {
      LossEval e = evaluate(loss, m, y, w);
      for (Eigen::Index j = 0; j < p; ++j) {
        double h = 1e-6 * std::max(1.0, std::fabs(w[j]));
        Eigen::VectorXd wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        double fd = (evaluate(loss, m, y, wp).value -
                     evaluate(loss, m, y, wm).value) /
                    (2.0 * h);
        double scale = std::max({1.0, std::fabs(fd), std::fabs(e.gradient[j])});
        CHECK(std::fabs(fd - e.gradient[j]) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("poisson_nll is convex along feasible segments") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 4, p = 3;
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.uniform(0.0, 1.0);
    AffineRateModel m(Eigen::VectorXd::Constant(n, 1.0), a);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv[i] = double(rng.poisson(2.0));
    ObservationSet y(yv);
    Eigen::VectorXd w1(p), w2(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      w1[j] = rng.uniform(0.0, 2.0);
      w2[j] = rng.uniform(0.0, 2.0);
    }
    double t = rng.uniform();
    Eigen::VectorXd wm = t * w1 + (1.0 - t) * w2;
    double lhs = poisson_nll(m, y, wm).value;
    double rhs = t * poisson_nll(m, y, w1).value +
                 (1.0 - t) * poisson_nll(m, y, w2).value;
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("harmonic mean never exceeds arithmetic mean") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 6;
    Eigen::MatrixXd a(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) a(i, j) = rng.uniform(0.0, 1.0);
    AffineRateModel m(Eigen::VectorXd::Constant(n, rng.uniform(0.5, 3.0)), a);
    ParamVector w(vec({rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)}));
    Eigen::VectorXd lam = rates(m, w);
    CHECK(rate_summary(m, w).lambda_harmonic <= lam.mean() + 1e-12);
  }
}

TEST_CASE("losses are invariant to joint row permutation") {
  Eigen::MatrixXd a = mat(3, 2, {0.2, 0.8, 0.5, 0.1, 0.9, 0.4});
  Eigen::VectorXd base = vec({1, 2, 3});
  Eigen::VectorXd yv = vec({2, 0, 4});
  Eigen::VectorXd w = vec({0.5, 1.0});
  // permutation (2, 0, 1)
  Eigen::MatrixXd ap(3, 2);
  Eigen::VectorXd basep(3), yp(3);
  int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i) {
    ap.row(i) = a.row(perm[i]);
    basep[i] = base[perm[i]];
    yp[i] = yv[perm[i]];
  }
  AffineRateModel m(base, a), mp(basep, ap);
  for (Loss loss : {Loss::PoissonNll, Loss::RescaledLasso, Loss::LeastSquares}) {
    double v1 = evaluate(loss, m, ObservationSet(yv), w).value;
    double v2 = evaluate(loss, mp, ObservationSet(yp), w).value;
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  }
}
