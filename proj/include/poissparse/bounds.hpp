#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poissparse/model.hpp"

namespace psr {

// A bound was requested outside its guaranteed regime (sample size or
// packing preconditions); the message names the violated inequality.
class InfeasibleRegimeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundInputs {
  double lambda_min = 0;
  double lambda_max = 0;
  double lambda_harmonic = 0;
  double a_max = 0;
  double gamma_k = 0;
  Eigen::Index k = 0;
  Eigen::Index n = 0;
  double zeta = 0;  // in (0, 1)
};

// zeta >= 2 exp(-n lambda_min min(1, lambda_min) / (4 lambda_h)); a
// violation is reported, not fatal, so sweeps can chart the formulas
// outside the guaranteed regime.
bool zeta_floor_satisfied(const BoundInputs& inp);

struct ScConstants {
  double kappa = 0;   // gamma_k / (9 lambda_max)
  double tau = 0;     // a_max^2 (4 + 2 log(lmax/lmin)) sqrt(log(2/z)/(n lh))
  double nu_n = 0;    // 2 a_max sqrt(log(2/z)/(n lh))
  double delta = 0;   // 3 (tau + nu_n) sqrt(k) / kappa
  bool zeta_floor_ok = true;
};

ScConstants sc_constants(const BoundInputs& inp);

// 54 lmax a_max^2 (3 + log(lmax/lmin)) / gamma_k * sqrt(k log(2/z)/(lh n))
double theorem1_bound(const BoundInputs& inp);

struct Codebook {
  Eigen::Index dim = 0;
  int d_min = 0;
  std::vector<std::vector<std::uint8_t>> words;
};

int hamming_distance(const std::vector<std::uint8_t>& a,
                     const std::vector<std::uint8_t>& b);

// Binary code with pairwise Hamming distance >= d_min and at least
// ceil(exp(dim/8)) words when d_min = ceil(dim/4) (Gilbert-Varshamov
// count). Randomized greedy packing with an exhaustive lexicographic
// fallback for dim <= 16; all pairwise distances verified before return.
Codebook gv_codebook(Eigen::Index dim, int d_min, std::uint64_t seed);

// One hypothesis per codeword: mass s - step*(k-1) on coordinate k-1 and
// step = (1/c) sqrt(a_min s / (n eta)) on the codeword's support.
std::vector<ParamVector> packing_set(const Codebook& cb, double s,
                                     Eigen::Index k, double a_min, double eta,
                                     Eigen::Index n, double c,
                                     Eigen::Index p = -1);

// KL(Poisson(lambda1) || Poisson(lambda2))
double poisson_kl(double lambda1, double lambda2);

struct FanoDiagnostics {
  double eta = 0;    // largest eigenvalue of A^T A / n
  double a_min = 0;  // smallest matrix entry
  double avg_kl = 0;  // exact pairwise-average KL term I
  double log_m = 0;
  double min_pairwise_dist = 0;
  Eigen::Index m = 0;
  bool kl_ok = false;          // I <= (k-1)/c^2
  bool fano_ratio_ok = false;  // (I + log 2)/log M <= 0.7
};

struct FanoResult {
  double bound = 0;  // (0.3 / 4c) sqrt((k-1) a_min s / (n eta))
  FanoDiagnostics diagnostics;
};

// Closed-form value of the lower bound; the appendix's (k-1) form.
double fano_bound_value(double a_min, double s, Eigen::Index k, Eigen::Index n,
                        double eta, double c);

// Builds the GV codebook and packing set on the given model and verifies
// the information-term inequalities by exact summation.
// sample_size_c is the constant C in the n >= C a_min (k-1)^2 / (s eta)
// precondition; it has no canonical value, so it is a parameter.
FanoResult fano_lower_bound(const AffineRateModel& model, double s,
                            Eigen::Index k, double c, std::uint64_t seed,
                            double sample_size_c = 1.0);

// Empirical frequency of (1/n) sum |y_i/lambda_i - 1| falling within
// 2 sqrt(log(2/zeta) / (n lambda_h)) over Monte Carlo trials.
double bernstein_coverage(const AffineRateModel& model,
                          const ParamVector& w_star, double zeta, int trials,
                          std::uint64_t seed);

// Minimum over sampled feasible perturbations of
// deltaQ1 - gamma_k ||Delta||^2 / (9 lambda_max); negative falsifies the
// supplied gamma_k.
double strong_convexity_diagnostic(const AffineRateModel& model,
                                   const ParamVector& w_star, double gamma_k,
                                   int samples, std::uint64_t seed);

}  // namespace psr
