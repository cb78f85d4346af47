#include "poissparse/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "poissparse/rng.hpp"

namespace psr {

namespace {

void validate(const MatrixSpec& spec) {
  if (spec.n < 1 || spec.p < 1)
    throw std::invalid_argument("MatrixSpec: n and p must be >= 1");
  switch (spec.kind) {
    case MatrixSpec::Kind::Beta:
      if (!(spec.alpha > 0.0) || !(spec.beta > 0.0))
        throw std::invalid_argument("MatrixSpec: alpha, beta must be > 0");
      break;
    case MatrixSpec::Kind::AltDist:
      if (!(spec.sigma > 0.0))
        throw std::invalid_argument("MatrixSpec: sigma must be > 0");
      break;
    case MatrixSpec::Kind::ShiftedSubgaussian:
      if (!(spec.a_wedge > 0.0) || !(spec.a_vee > 0.0))
        throw std::invalid_argument("MatrixSpec: a_wedge, a_vee must be > 0");
      break;
    case MatrixSpec::Kind::Uniform01:
      break;
  }
}

double draw_entry(const MatrixSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case MatrixSpec::Kind::Uniform01:
      return rng.uniform();
    case MatrixSpec::Kind::Beta:
      return rng.beta(spec.alpha, spec.beta);
    case MatrixSpec::Kind::AltDist: {
      double z = rng.normal(spec.mu, spec.sigma);
      if (z < -1.0) return 0.0;
      if (z > 1.0) return 2.0;
      return z + 1.0;
    }
    case MatrixSpec::Kind::ShiftedSubgaussian:
      // bounded draw in [-a_wedge, a_vee], then the all-ones shift of
      // shifted_construction applied entrywise
      return rng.uniform(-spec.a_wedge, spec.a_vee) + spec.a_wedge;
  }
  throw std::logic_error("MatrixSpec: unknown kind");
}

}  // namespace

Eigen::MatrixXd generate_matrix(const MatrixSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Eigen::MatrixXd a(spec.n, spec.p);
  for (Eigen::Index i = 0; i < spec.n; ++i)
    for (Eigen::Index j = 0; j < spec.p; ++j) a(i, j) = draw_entry(spec, rng);
  return a;
}

Eigen::MatrixXd shifted_construction(const Eigen::MatrixXd& a_g,
                                     double a_wedge) {
  Eigen::MatrixXd a = a_g.array() + a_wedge;
  if ((a.array() < 0.0).any())
    throw std::invalid_argument(
        "shifted_construction: a_wedge must be >= -(min entry of a_g)");
  return a;
}

namespace {

// Rayleigh-style quotient ||A u||^2 / (n ||u||^2).
double cone_quotient(const Eigen::MatrixXd& a, const Eigen::VectorXd& u) {
  double nu = u.squaredNorm();
  if (nu < 1e-300) return std::numeric_limits<double>::infinity();
  return (a * u).squaredNorm() / (double(a.rows()) * nu);
}

// Samples k distinct indices from [0, p).
std::vector<Eigen::Index> sample_support(Eigen::Index p, Eigen::Index k,
                                         Rng& rng) {
  std::vector<Eigen::Index> idx(p);
  for (Eigen::Index i = 0; i < p; ++i) idx[i] = i;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::Index j = i + Eigen::Index(rng.next_u64() % std::uint64_t(p - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::size_t(k));
  return idx;
}

// One random cone vector: signed values on S, off-support mass rescaled to
// a random fraction of ||u_S||_1.
Eigen::VectorXd sample_cone_vector(Eigen::Index p, Eigen::Index k, Rng& rng) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
  auto support = sample_support(p, k, rng);
  double l1_s = 0.0;
  for (auto i : support) {
    u[i] = rng.normal();
    l1_s += std::fabs(u[i]);
  }
  if (l1_s == 0.0) {
    u[support[0]] = 1.0;
    l1_s = 1.0;
  }
  Eigen::VectorXd off(p - k);
  double l1_off = 0.0;
  for (Eigen::Index i = 0; i < off.size(); ++i) {
    off[i] = rng.normal();
    l1_off += std::fabs(off[i]);
  }
  if (l1_off > 0.0) {
    double scale = rng.uniform() * l1_s / l1_off;
    Eigen::Index pos = 0;
    std::vector<bool> in_s(std::size_t(p), false);
    for (auto i : support) in_s[std::size_t(i)] = true;
    for (Eigen::Index j = 0; j < p; ++j)
      if (!in_s[std::size_t(j)]) u[j] = off[pos++] * scale;
  }
  return u;
}

struct ConeRefiner {
  const Eigen::MatrixXd& a;
  const std::vector<bool>& in_s;

  // Exact 1-D minimization of the quotient along coordinate j, subject to
  // the cone's l1 constraint on u. Updates u in place when it improves.
  bool refine_coordinate(Eigen::VectorXd& u, Eigen::Index j,
                         Eigen::VectorXd& au) const {
    const Eigen::Index n = a.rows();
    const double old_t = u[j];
    Eigen::VectorXd au_w = au - old_t * a.col(j);
    const double alpha = a.col(j).squaredNorm();
    const double beta = a.col(j).dot(au_w);
    const double gamma_c = au_w.squaredNorm();
    const double d = u.squaredNorm() - old_t * old_t;

    double l1_s = 0.0, l1_c = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (i == j) continue;
      (in_s[std::size_t(i)] ? l1_s : l1_c) += std::fabs(u[i]);
    }

    std::vector<double> candidates{0.0, old_t};
    if (std::fabs(beta) > 0.0) {
      // d/dt of (alpha t^2 + 2 beta t + gamma_c)/(t^2 + d) = 0
      double qa = beta, qb = -(alpha * d - gamma_c), qc = -beta * d;
      double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        candidates.push_back((-qb + sq) / (2.0 * qa));
        candidates.push_back((-qb - sq) / (2.0 * qa));
      }
    }

    // Cone feasibility for coordinate j, with the rest of u fixed.
    double lo_abs = 0.0;
    double hi_abs = std::numeric_limits<double>::infinity();
    if (in_s[std::size_t(j)]) {
      lo_abs = std::max(0.0, l1_c - l1_s);
      candidates.push_back(lo_abs);
      candidates.push_back(-lo_abs);
    } else {
      hi_abs = l1_s - l1_c;
      if (hi_abs < 0.0) return false;
      candidates.push_back(hi_abs);
      candidates.push_back(-hi_abs);
    }

    double best_t = old_t;
    double best_q = (gamma_c + 2.0 * beta * old_t + alpha * old_t * old_t) /
                    (double(n) * (d + old_t * old_t));
    for (double t : candidates) {
      double at = std::fabs(t);
      if (at < lo_abs || at > hi_abs) continue;
      double denom = d + t * t;
      if (denom < 1e-300) continue;
      double q = (gamma_c + 2.0 * beta * t + alpha * t * t) /
                 (double(n) * denom);
      if (q < best_q - 1e-15) {
        best_q = q;
        best_t = t;
      }
    }
    if (best_t == old_t) return false;
    u[j] = best_t;
    au = au_w + best_t * a.col(j);
    return true;
  }

  void refine(Eigen::VectorXd& u, int max_sweeps = 6) const {
    Eigen::VectorXd au = a * u;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      bool changed = false;
      for (Eigen::Index j = 0; j < u.size(); ++j)
        changed |= refine_coordinate(u, j, au);
      if (!changed) break;
    }
  }
};

void enumerate_supports(const Eigen::MatrixXd& a, Eigen::Index k,
                        double& best_q, Eigen::VectorXd& best_u) {
  const Eigen::Index p = a.cols();
  std::vector<Eigen::Index> support(static_cast<std::size_t>(k), 0);
  std::vector<bool> in_s(std::size_t(p), false);

  auto visit = [&]() {
    ConeRefiner refiner{a, in_s};
    for (std::uint64_t signs = 0; signs < (1ULL << unsigned(k)); ++signs) {
      Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
      for (Eigen::Index i = 0; i < k; ++i)
        u[support[std::size_t(i)]] = (signs >> unsigned(i)) & 1 ? -1.0 : 1.0;
      refiner.refine(u);
      double q = cone_quotient(a, u);
      if (q < best_q) {
        best_q = q;
        best_u = u;
      }
    }
  };

  // lexicographic enumeration of all supports of size k
  std::function<void(Eigen::Index, Eigen::Index)> rec =
      [&](Eigen::Index start, Eigen::Index depth) {
        if (depth == k) {
          visit();
          return;
        }
        for (Eigen::Index i = start; i <= p - (k - depth); ++i) {
          support[std::size_t(depth)] = i;
          in_s[std::size_t(i)] = true;
          rec(i + 1, depth + 1);
          in_s[std::size_t(i)] = false;
        }
      };
  rec(0, 0);
}

}  // namespace

REEstimate estimate_re(const Eigen::MatrixXd& a, Eigen::Index k, int trials,
                       std::uint64_t seed) {
  const Eigen::Index p = a.cols();
  if (k < 1 || k > p)
    throw std::invalid_argument("estimate_re: require 1 <= k <= p");
  if (trials < 1) throw std::invalid_argument("estimate_re: trials >= 1");

  double best_q = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u;

  // Sampling at every sparsity level j <= k keeps gamma_hat non-increasing
  // in k under a fixed seed schedule: the cone for k contains every smaller
  // cone, and the (j, trial) substreams do not depend on k.
  for (Eigen::Index j = 1; j <= k; ++j) {
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, {std::uint64_t(j), std::uint64_t(t)}));
      Eigen::VectorXd u = sample_cone_vector(p, j, rng);
      double q = cone_quotient(a, u);
      if (q < best_q) {
        best_q = q;
        best_u = u;
      }
    }
  }

  if (p <= 12) enumerate_supports(a, k, best_q, best_u);

  REEstimate est;
  est.gamma_hat = best_q;
  est.k = k;
  est.trials = trials;
  est.minimizer_found = best_u;
  return est;
}

}  // namespace psr
