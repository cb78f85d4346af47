#include "poissparse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psr {

double l2_error(const ParamVector& w_hat, const ParamVector& w_star) {
  if (w_hat.dim() != w_star.dim())
    throw std::invalid_argument("l2_error: dimension mismatch");
  return (w_hat.values - w_star.values).norm();
}

RecoveryMetrics support_metrics(const ParamVector& w_hat,
                                const ParamVector& w_star, double t) {
  if (w_hat.dim() != w_star.dim())
    throw std::invalid_argument("support_metrics: dimension mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("support_metrics: t >= 0");
  RecoveryMetrics m;
  m.l2_error = l2_error(w_hat, w_star);
  bool equal = true;
  for (Eigen::Index i = 0; i < w_hat.dim(); ++i) {
    bool declared = w_hat.values[i] > t;
    bool truth = w_star.values[i] != 0.0;
    if (declared && truth) ++m.detections;
    if (declared && !truth) ++m.false_alarms;
    if (declared != truth) equal = false;
  }
  m.support_success = equal;
  return m;
}

std::vector<ROCPoint> roc_curve(const std::vector<ParamVector>& w_hats,
                                const std::vector<ParamVector>& w_stars,
                                const std::vector<double>& thresholds) {
  if (w_hats.empty() || w_hats.size() != w_stars.size())
    throw std::invalid_argument("roc_curve: matched non-empty lists required");
  if (thresholds.empty())
    throw std::invalid_argument("roc_curve: thresholds must be non-empty");
  std::vector<ROCPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    double pd = 0.0, pf = 0.0;
    for (std::size_t i = 0; i < w_hats.size(); ++i) {
      auto m = support_metrics(w_hats[i], w_stars[i], t);
      double k = double(w_stars[i].sparsity());
      double p = double(w_stars[i].dim());
      pd += double(m.detections) / k;
      pf += double(m.false_alarms) / (p - k);
    }
    points.push_back(
        {t, pd / double(w_hats.size()), pf / double(w_hats.size())});
  }
  return points;
}

double normal_q(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

namespace {

double bin_mass(long long y, double mu, double sigma) {
  return normal_q((double(y) - mu) / sigma) -
         normal_q((double(y) + 1.0 - mu) / sigma);
}

double normalizer(double mu, double sigma, bool verbatim_normalizer) {
  return verbatim_normalizer ? normal_q(mu / sigma) : normal_q(-mu / sigma);
}

}  // namespace

double discretized_gaussian_pmf(long long y, double mu, double sigma,
                                bool verbatim_normalizer) {
  if (!(sigma > 0.0))
    throw std::domain_error("discretized_gaussian_pmf: sigma must be > 0");
  if (y < 0) return 0.0;
  return bin_mass(y, mu, sigma) / normalizer(mu, sigma, verbatim_normalizer);
}

double log_discretized_gaussian_pmf(long long y, double mu, double sigma,
                                    bool verbatim_normalizer) {
  double mass = discretized_gaussian_pmf(y, mu, sigma, verbatim_normalizer);
  if (mass <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(mass);
}

double log_poisson_pmf(double y, double rate) {
  if (!(rate > 0.0)) throw std::domain_error("log_poisson_pmf: rate > 0");
  return y * std::log(rate) - rate - std::lgamma(y + 1.0);
}

BayesFactor bayes_factor(const ObservationSet& y, const AffineRateModel& model,
                         const ParamVector& w_ml_k, const ParamVector& w_ls_k) {
  const Eigen::VectorXd lam_ml = rates(model, w_ml_k);
  const Eigen::VectorXd lam_ls = rates(model, w_ls_k);
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    if (!(lam_ml[i] > kRateFloor)) throw RateDomainError(i, lam_ml[i]);
    if (!(lam_ls[i] > kRateFloor)) throw RateDomainError(i, lam_ls[i]);
  }
  BayesFactor bf;
  double log_num = 0.0, log_den = 0.0;
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    log_num += log_poisson_pmf(y.counts[i], lam_ml[i]);
    double term = log_discretized_gaussian_pmf(
        (long long)y.counts[i], lam_ls[i], std::sqrt(lam_ls[i]));
    if (!std::isfinite(term)) {
      bf.denominator_underflow = true;
      bf.log_bf = std::numeric_limits<double>::infinity();
      return bf;
    }
    log_den += term;
  }
  bf.log_bf = log_num - log_den;
  return bf;
}

double heldout_loglik(const ObservationSet& y_test,
                      const AffineRateModel& model_test, const ParamVector& w,
                      LikelihoodFamily family) {
  const Eigen::VectorXd lam = rates(model_test, w);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (!(lam[i] > kRateFloor)) throw RateDomainError(i, lam[i]);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (family == LikelihoodFamily::PoissonML)
      total += log_poisson_pmf(y_test.counts[i], lam[i]);
    else
      total += log_discretized_gaussian_pmf((long long)y_test.counts[i],
                                            lam[i], std::sqrt(lam[i]));
  }
  return total;
}

}  // namespace psr
