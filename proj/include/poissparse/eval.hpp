#pragma once

#include <Eigen/Core>
#include <vector>

#include "poissparse/model.hpp"

namespace psr {

struct RecoveryMetrics {
  double l2_error = 0;
  bool support_success = false;  // thresholded estimate support == truth
  int detections = 0;            // |S_hat ∩ S|
  int false_alarms = 0;          // |S_hat \ S|
};

struct ROCPoint {
  double threshold = 0;
  double pd = 0;
  double pf = 0;
};

double l2_error(const ParamVector& w_hat, const ParamVector& w_star);

RecoveryMetrics support_metrics(const ParamVector& w_hat,
                                const ParamVector& w_star, double t);

// Per threshold: PD = mean detections/k, PF = mean false_alarms/(p - k)
// across matched (estimate, truth) trials. Thresholds sorted descending.
std::vector<ROCPoint> roc_curve(const std::vector<ParamVector>& w_hats,
                                const std::vector<ParamVector>& w_stars,
                                const std::vector<double>& thresholds);

// Standard normal tail probability.
double normal_q(double x);

// Integer-bin histogram of Normal(mu, sigma) truncated to y >= 0:
// (Q((y-mu)/sigma) - Q((y+1-mu)/sigma)) / Z. The normalizer Z = Q(-mu/sigma)
// makes the masses telescope to exactly 1 over y >= 0; verbatim_normalizer
// uses the alternative Q(mu/sigma) convention instead.
double discretized_gaussian_pmf(long long y, double mu, double sigma,
                                bool verbatim_normalizer = false);
double log_discretized_gaussian_pmf(long long y, double mu, double sigma,
                                    bool verbatim_normalizer = false);

double log_poisson_pmf(double y, double rate);

struct BayesFactor {
  double log_bf = 0;
  bool denominator_underflow = false;  // log BF is +inf
};

// log of Pr(y | Poisson at rates(w_ml)) / Pr(y | discretized Gaussian at
// rates(w_ls) with variance = mean), computed in log space.
BayesFactor bayes_factor(const ObservationSet& y, const AffineRateModel& model,
                         const ParamVector& w_ml_k, const ParamVector& w_ls_k);

enum class LikelihoodFamily { PoissonML, DiscretizedGaussian };

double heldout_loglik(const ObservationSet& y_test,
                      const AffineRateModel& model_test, const ParamVector& w,
                      LikelihoodFamily family);

}  // namespace psr
