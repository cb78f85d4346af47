#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace psr {

// Random sensing-matrix constructions. AltDist is the clamped normal
// V = clamp(Z + 1, 0, 2) with Z ~ Normal(mu, sigma^2). ShiftedSubgaussian
// draws bounded entries in [-a_wedge, a_vee] and shifts by a_wedge so the
// result is nonnegative.
struct MatrixSpec {
  enum class Kind { Uniform01, Beta, AltDist, ShiftedSubgaussian };

  Kind kind = Kind::Uniform01;
  Eigen::Index n = 1;
  Eigen::Index p = 1;
  std::uint64_t seed = 0;
  double alpha = 1.0;    // Beta
  double beta = 3.0;     // Beta
  double mu = 0.0;       // AltDist
  double sigma = 0.5;    // AltDist (sigma^2 = 0.25)
  double a_wedge = 1.0;  // ShiftedSubgaussian
  double a_vee = 1.0;    // ShiftedSubgaussian
};

// i.i.d. entries from the named distribution, bit-reproducible per seed.
Eigen::MatrixXd generate_matrix(const MatrixSpec& spec);

// a_g + a_wedge * ones; every output entry must come out >= 0.
Eigen::MatrixXd shifted_construction(const Eigen::MatrixXd& a_g,
                                     double a_wedge);

struct REEstimate {
  double gamma_hat = 0;  // upper estimate of the true gamma_k
  Eigen::Index k = 0;
  int trials = 0;
  Eigen::VectorXd minimizer_found;
};

// Estimates the restricted-eigenvalue constant gamma_k: the minimum of
// ||A u||^2 / (n ||u||^2) over cone vectors u with ||u_{S^c}||_1 <=
// ||u_S||_1, |S| = k. Random cone sampling, plus exhaustive support
// enumeration with coordinate-descent refinement when p <= 12. The result
// is an upper estimate; certifying gamma_k exactly is not attempted.
REEstimate estimate_re(const Eigen::MatrixXd& a, Eigen::Index k, int trials,
                       std::uint64_t seed);

}  // namespace psr
