#include "poissparse/bounds.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "poissparse/rng.hpp"

namespace psr {

namespace {

void validate_inputs(const BoundInputs& inp) {
  if (!(inp.lambda_min > 0.0) || !(inp.lambda_max > 0.0) ||
      !(inp.lambda_harmonic > 0.0) || !(inp.a_max > 0.0) ||
      !(inp.gamma_k > 0.0) || inp.k < 1 || inp.n < 1)
    throw std::invalid_argument("BoundInputs: all quantities must be positive");
  if (!(inp.zeta > 0.0) || !(inp.zeta < 1.0))
    throw std::invalid_argument("BoundInputs: zeta must lie in (0, 1)");
}

double deviation_radius(double zeta, Eigen::Index n, double lambda_h) {
  return 2.0 * std::sqrt(std::log(2.0 / zeta) / (double(n) * lambda_h));
}

}  // namespace

bool zeta_floor_satisfied(const BoundInputs& inp) {
  double floor = 2.0 * std::exp(-double(inp.n) * inp.lambda_min *
                                std::min(1.0, inp.lambda_min) /
                                (4.0 * inp.lambda_harmonic));
  return inp.zeta >= floor;
}

ScConstants sc_constants(const BoundInputs& inp) {
  validate_inputs(inp);
  ScConstants out;
  out.zeta_floor_ok = zeta_floor_satisfied(inp);
  const double root =
      std::sqrt(std::log(2.0 / inp.zeta) / (double(inp.n) * inp.lambda_harmonic));
  const double log_ratio = std::log(inp.lambda_max / inp.lambda_min);
  out.kappa = inp.gamma_k / (9.0 * inp.lambda_max);
  out.tau = inp.a_max * inp.a_max * (4.0 + 2.0 * log_ratio) * root;
  out.nu_n = 2.0 * inp.a_max * root;
  out.delta = 3.0 * (out.tau + out.nu_n) * std::sqrt(double(inp.k)) / out.kappa;
  return out;
}

double theorem1_bound(const BoundInputs& inp) {
  validate_inputs(inp);
  const double log_ratio = std::log(inp.lambda_max / inp.lambda_min);
  return 54.0 * inp.lambda_max * inp.a_max * inp.a_max * (3.0 + log_ratio) /
         inp.gamma_k *
         std::sqrt(double(inp.k) * std::log(2.0 / inp.zeta) /
                   (inp.lambda_harmonic * double(inp.n)));
}

int hamming_distance(const std::vector<std::uint8_t>& a,
                     const std::vector<std::uint8_t>& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

namespace {

bool far_from_all(const std::vector<std::vector<std::uint8_t>>& words,
                  const std::vector<std::uint8_t>& w, int d_min) {
  for (const auto& kept : words)
    if (hamming_distance(kept, w) < d_min) return false;
  return true;
}

}  // namespace

Codebook gv_codebook(Eigen::Index dim, int d_min, std::uint64_t seed) {
  if (dim < 1 || d_min < 1 || d_min > dim)
    throw std::invalid_argument("gv_codebook: require 1 <= d_min <= dim");
  const std::size_t target =
      std::size_t(std::ceil(std::exp(double(dim) / 8.0)));

  Codebook cb;
  cb.dim = dim;
  cb.d_min = d_min;

  Rng rng(seed);
  const long long budget = 512LL * (long long)target + 4096;
  std::vector<std::uint8_t> w(static_cast<std::size_t>(dim), 0);
  for (long long attempt = 0;
       attempt < budget && cb.words.size() < target; ++attempt) {
    for (auto& bit : w) bit = std::uint8_t(rng.next_u64() & 1);
    if (far_from_all(cb.words, w, d_min)) cb.words.push_back(w);
  }

  if (cb.words.size() < target && dim <= 16) {
    // exhaustive lexicographic greedy over all 2^dim words
    cb.words.clear();
    for (std::uint64_t x = 0; x < (1ULL << unsigned(dim)); ++x) {
      for (Eigen::Index b = 0; b < dim; ++b)
        w[std::size_t(b)] = std::uint8_t((x >> unsigned(b)) & 1);
      if (far_from_all(cb.words, w, d_min)) cb.words.push_back(w);
      if (cb.words.size() >= target) break;
    }
  }

  if (cb.words.size() < target)
    throw std::runtime_error(
        "gv_codebook: packing budget exhausted below the GV count of " +
        std::to_string(target) + " words; retry with a new seed");

  // independent verification of the distance invariant
  for (std::size_t i = 0; i < cb.words.size(); ++i)
    for (std::size_t j = i + 1; j < cb.words.size(); ++j)
      if (hamming_distance(cb.words[i], cb.words[j]) < d_min)
        throw std::logic_error("gv_codebook: distance invariant violated");
  return cb;
}

std::vector<ParamVector> packing_set(const Codebook& cb, double s,
                                     Eigen::Index k, double a_min, double eta,
                                     Eigen::Index n, double c,
                                     Eigen::Index p) {
  if (cb.dim != k - 1)
    throw std::invalid_argument("packing_set: codebook dim must equal k - 1");
  if (!(s > 0.0) || !(a_min > 0.0) || !(eta > 0.0) || !(c > 0.0) || n < 1)
    throw std::invalid_argument("packing_set: parameters must be positive");
  if (p < 0) p = k;
  if (p < k) throw std::invalid_argument("packing_set: require p >= k");

  const double step = std::sqrt(a_min * s / (double(n) * eta)) / c;
  if (s < 2.0 * step * double(k - 1)) {
    // s >= (2/c) sqrt(a_min s / (n eta)) (k-1) rearranged for n
    double n_min = 4.0 * a_min * double(k - 1) * double(k - 1) /
                   (c * c * s * eta);
    throw InfeasibleRegimeError(
        "packing_set: s < 2 step (k-1); need n >= " + std::to_string(n_min));
  }

  std::vector<ParamVector> out;
  out.reserve(cb.words.size());
  for (const auto& word : cb.words) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    w[k - 1] = s - step * double(k - 1);
    for (Eigen::Index t = 0; t < k - 1; ++t)
      if (word[std::size_t(t)]) w[t] = step;
    out.emplace_back(std::move(w));
  }
  return out;
}

double poisson_kl(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::domain_error("poisson_kl: rates must be positive");
  return lambda1 * std::log(lambda1 / lambda2) - lambda1 + lambda2;
}

double fano_bound_value(double a_min, double s, Eigen::Index k, Eigen::Index n,
                        double eta, double c) {
  return 0.3 / (4.0 * c) *
         std::sqrt(double(k - 1) * a_min * s / (double(n) * eta));
}

FanoResult fano_lower_bound(const AffineRateModel& model, double s,
                            Eigen::Index k, double c, std::uint64_t seed,
                            double sample_size_c) {
  if (k < 9)
    throw InfeasibleRegimeError("fano_lower_bound: requires k >= 9");
  if (c < 34.0)
    throw InfeasibleRegimeError("fano_lower_bound: requires c >= 34");
  if (model.p() < k)
    throw std::invalid_argument("fano_lower_bound: model p must be >= k");

  FanoDiagnostics diag;
  diag.a_min = model.matrix.minCoeff();
  if (!(diag.a_min > 0.0))
    throw InfeasibleRegimeError(
        "fano_lower_bound: requires a_min > 0 (strictly positive matrix)");
  // eta is the largest eigenvalue of A^T A / n; the appendix's chain of
  // inequalities uses ||A d||^2 <= n eta ||d||^2.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(model.matrix);
  double sv = svd.singularValues()[0];
  diag.eta = sv * sv / double(model.n());

  const Eigen::Index n = model.n();
  const double n_min =
      sample_size_c * diag.a_min * double(k - 1) * double(k - 1) / (s * diag.eta);
  if (double(n) < n_min)
    throw InfeasibleRegimeError(
        "fano_lower_bound: n < C a_min (k-1)^2 / (s eta); need n >= " +
        std::to_string(n_min));

  const int d_min = int(std::ceil(double(k - 1) / 4.0));
  Codebook cb = gv_codebook(k - 1, d_min, seed);
  auto packing = packing_set(cb, s, k, diag.a_min, diag.eta, n, c, model.p());

  const Eigen::Index m = Eigen::Index(packing.size());
  diag.m = m;
  diag.log_m = std::log(double(m));

  // rate matrix: column j holds lambda(w_j)
  Eigen::MatrixXd lam(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    lam.col(j) = rates(model, packing[std::size_t(j)]);

  double total_kl = 0.0;
  diag.min_pairwise_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      for (Eigen::Index t = 0; t < n; ++t)
        total_kl += poisson_kl(lam(t, i), lam(t, j));
      double dist = (packing[std::size_t(i)].values -
                     packing[std::size_t(j)].values)
                        .norm();
      diag.min_pairwise_dist = std::min(diag.min_pairwise_dist, dist);
    }
  }
  diag.avg_kl = total_kl / double(m * m);
  diag.kl_ok = diag.avg_kl <= double(k - 1) / (c * c);
  diag.fano_ratio_ok = (diag.avg_kl + std::log(2.0)) / diag.log_m <= 0.7;

  FanoResult result;
  result.bound = fano_bound_value(diag.a_min, s, k, n, diag.eta, c);
  result.diagnostics = diag;
  return result;
}

double bernstein_coverage(const AffineRateModel& model,
                          const ParamVector& w_star, double zeta, int trials,
                          std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("bernstein_coverage: trials must be >= 1");
  if (!(zeta > 0.0) || !(zeta < 1.0))
    throw std::invalid_argument("bernstein_coverage: zeta must be in (0, 1)");

  const Eigen::VectorXd lam = rates(model, w_star);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (!(lam[i] > kRateFloor)) throw RateDomainError(i, lam[i]);
  const RateSummary summary = rate_summary(model, w_star);

  BoundInputs floor_check;
  floor_check.lambda_min = summary.lambda_min;
  floor_check.lambda_max = summary.lambda_max;
  floor_check.lambda_harmonic = summary.lambda_harmonic;
  floor_check.a_max = std::max(summary.a_max, 1e-300);
  floor_check.gamma_k = 1.0;
  floor_check.k = 1;
  floor_check.n = model.n();
  floor_check.zeta = zeta;
  if (!zeta_floor_satisfied(floor_check))
    std::cerr << "bernstein_coverage: warning: zeta below its guaranteed "
                 "floor; the bound is not certified in this regime\n";

  const double radius =
      deviation_radius(zeta, model.n(), summary.lambda_harmonic);
  const double inv_n = 1.0 / double(model.n());

  long long hits = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {std::uint64_t(t)}));
    double stat = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      stat += std::fabs(double(rng.poisson(lam[i])) / lam[i] - 1.0);
    if (stat * inv_n <= radius) ++hits;
  }
  return double(hits) / double(trials);
}

double strong_convexity_diagnostic(const AffineRateModel& model,
                                   const ParamVector& w_star, double gamma_k,
                                   int samples, std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("strong_convexity_diagnostic: samples >= 1");
  const double s = w_star.l1();
  const Eigen::VectorXd lam_star = rates(model, w_star);
  for (Eigen::Index i = 0; i < lam_star.size(); ++i)
    if (!(lam_star[i] > kRateFloor)) throw RateDomainError(i, lam_star[i]);
  const RateSummary summary = rate_summary(model, w_star);
  const double curvature = gamma_k / (9.0 * summary.lambda_max);
  const double inv_n = 1.0 / double(model.n());

  double min_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < samples; ++t) {
    Rng rng(derive_seed(seed, {std::uint64_t(t)}));
    // random feasible w: exponential weights normalized, random radius
    Eigen::VectorXd w(model.p());
    for (Eigen::Index j = 0; j < w.size(); ++j)
      w[j] = -std::log(rng.uniform_oc());
    w *= s * rng.uniform() / w.sum();

    Eigen::VectorXd delta = w - w_star.values;
    Eigen::VectorXd shift = model.matrix * delta;
    bool skip = false;
    double dq1 = 0.0;
    for (Eigen::Index i = 0; i < shift.size(); ++i) {
      double ratio = 1.0 + shift[i] / lam_star[i];
      if (!(ratio > kRateFloor)) {
        skip = true;
        break;
      }
      dq1 += -lam_star[i] * std::log(ratio) + shift[i];
    }
    if (skip) continue;
    dq1 *= inv_n;
    double margin = dq1 - curvature * delta.squaredNorm();
    min_margin = std::min(min_margin, margin);
  }
  return min_margin;
}

}  // namespace psr
