#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "poissparse/sensing.hpp"

using namespace psr;

TEST_CASE("uniform01 entries lie in [0,1] and are reproducible") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::Uniform01;
  spec.n = 50;
  spec.p = 40;
  spec.seed = 123;
  Eigen::MatrixXd a = generate_matrix(spec);
  CHECK((a.array() >= 0.0).all());
  CHECK((a.array() <= 1.0).all());
  CHECK(a.isApprox(generate_matrix(spec)));
  spec.seed = 124;
  CHECK(!a.isApprox(generate_matrix(spec)));
}

TEST_CASE("beta(1,3) sample mean is alpha/(alpha+beta)") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::Beta;
  spec.n = 500;
  spec.p = 200;  // 1e5 draws
  spec.seed = 5;
  Eigen::MatrixXd a = generate_matrix(spec);
  CHECK(std::fabs(a.mean() - 0.25) < 0.01);
  CHECK((a.array() >= 0.0).all());
  CHECK((a.array() <= 1.0).all());
}

TEST_CASE("altdist clamps and hits zero with probability Phi(-2)") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::AltDist;
  spec.n = 500;
  spec.p = 200;
  spec.seed = 9;
  Eigen::MatrixXd a = generate_matrix(spec);
  CHECK((a.array() >= 0.0).all());
  CHECK((a.array() <= 2.0).all());
  double zero_frac = double((a.array() == 0.0).count()) / double(a.size());
  CHECK(std::fabs(zero_frac - 0.02275) < 0.005);
  double two_frac = double((a.array() == 2.0).count()) / double(a.size());
  CHECK(std::fabs(two_frac - 0.02275) < 0.005);
}

TEST_CASE("shifted subgaussian entries are nonnegative and bounded") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::ShiftedSubgaussian;
  spec.n = 100;
  spec.p = 50;
  spec.seed = 3;
  spec.a_wedge = 1.0;
  spec.a_vee = 2.0;
  Eigen::MatrixXd a = generate_matrix(spec);
  CHECK((a.array() >= 0.0).all());
  CHECK((a.array() <= spec.a_wedge + spec.a_vee).all());
}

TEST_CASE("shifted_construction") {
  Eigen::MatrixXd g(1, 2);
  g << -1, 1;
  Eigen::MatrixXd out = shifted_construction(g, 1.0);
  CHECK(out(0, 0) == doctest::Approx(0.0));
  CHECK(out(0, 1) == doctest::Approx(2.0));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 3);
  CHECK((shifted_construction(z, 0.5).array() == 0.5).all());
  CHECK_THROWS_AS(shifted_construction(g, 0.5), std::invalid_argument);
}

TEST_CASE("estimate_re on an isometry is one") {
  const Eigen::Index n = 4;
  Eigen::MatrixXd a = std::sqrt(double(n)) * Eigen::MatrixXd::Identity(n, n);
  REEstimate est = estimate_re(a, 1, 20, 1);
  CHECK(est.gamma_hat == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("estimate_re finds a cone null vector for duplicate columns") {
  Eigen::MatrixXd a(3, 4);
  a << 1, 1, 0.2, 0.7,
       0.5, 0.5, 0.9, 0.1,
       0.3, 0.3, 0.4, 0.8;
  REEstimate est = estimate_re(a, 2, 20, 1);
  CHECK(est.gamma_hat == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("estimate_re exhausts small diagonal designs") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, 0, 2;
  REEstimate est = estimate_re(a, 1, 20, 1);
  CHECK(est.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("estimate_re is scale-covariant") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::Uniform01;
  spec.n = 20;
  spec.p = 15;
  spec.seed = 77;
  Eigen::MatrixXd a = generate_matrix(spec);
  double g1 = estimate_re(a, 3, 30, 4).gamma_hat;
  double g3 = estimate_re(3.0 * a, 3, 30, 4).gamma_hat;
  CHECK(g3 == doctest::Approx(9.0 * g1).epsilon(1e-9));
}

TEST_CASE("estimate_re is non-increasing in k") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::Uniform01;
  spec.n = 25;
  spec.p = 30;
  spec.seed = 55;
  Eigen::MatrixXd a = generate_matrix(spec);
  double prev = estimate_re(a, 1, 40, 6).gamma_hat;
  for (Eigen::Index k = 2; k <= 6; ++k) {
    double g = estimate_re(a, k, 40, 6).gamma_hat;
    CHECK(g <= prev + 1e-12);
    prev = g;
  }
}

TEST_CASE("estimate_re minimizer lives in the cone and attains gamma_hat") {
  MatrixSpec spec;
  spec.kind = MatrixSpec::Kind::Uniform01;
  spec.n = 15;
  spec.p = 10;
  spec.seed = 21;
  Eigen::MatrixXd a = generate_matrix(spec);
  const Eigen::Index k = 3;
  REEstimate est = estimate_re(a, k, 30, 8);
  const Eigen::VectorXd& u = est.minimizer_found;
  REQUIRE(u.size() == a.cols());
  double quotient =
      (a * u).squaredNorm() / (double(a.rows()) * u.squaredNorm());
  CHECK(quotient == doctest::Approx(est.gamma_hat).epsilon(1e-9));
  // cone membership: l1 mass off the top-k coordinates bounded by the top-k
  Eigen::VectorXd mag = u.cwiseAbs();
  std::vector<double> sorted(mag.data(), mag.data() + mag.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double top = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) top += sorted[std::size_t(i)];
  CHECK(mag.sum() - top <= top + 1e-9);
}

TEST_CASE("estimate_re rejects k > p") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(estimate_re(a, 3, 5, 0), std::invalid_argument);
}
