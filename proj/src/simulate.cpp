#include "poissparse/simulate.hpp"

#include <stdexcept>
#include <vector>

#include "poissparse/rng.hpp"

namespace psr {

ParamVector generate_sparse_signal(const SignalSpec& spec) {
  if (spec.k < 1 || spec.k > spec.p)
    throw std::invalid_argument("SignalSpec: require 1 <= k <= p");
  if (!(spec.s > 0.0)) throw std::invalid_argument("SignalSpec: s must be > 0");

  Rng rng(spec.seed);
  std::vector<Eigen::Index> idx(std::size_t(spec.p));
  for (Eigen::Index i = 0; i < spec.p; ++i) idx[std::size_t(i)] = i;
  for (Eigen::Index i = 0; i < spec.k; ++i) {
    Eigen::Index j =
        i + Eigen::Index(rng.next_u64() % std::uint64_t(spec.p - i));
    std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.p);
  double total = 0.0;
  for (Eigen::Index i = 0; i < spec.k; ++i) {
    // Uniform(0, 1] keeps the support size exactly k after rescaling.
    double v = rng.uniform_oc();
    w[idx[std::size_t(i)]] = v;
    total += v;
  }
  w *= spec.s / total;
  return ParamVector(std::move(w));
}

ObservationSet sample_observations(const AffineRateModel& model,
                                   const ParamVector& w_star,
                                   std::uint64_t seed) {
  Eigen::VectorXd lam = rates(model, w_star);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] < 0.0) throw RateDomainError(i, lam[i]);
  Rng rng(seed);
  Eigen::VectorXd y(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    y[i] = double(rng.poisson(lam[i]));
  return ObservationSet(std::move(y));
}

AffineRateModel make_quenching_model(const Eigen::VectorXd& lambda_base,
                                     const Eigen::MatrixXd& q) {
  if (lambda_base.size() != q.rows())
    throw std::invalid_argument(
        "make_quenching_model: lambda_base length must equal q row count");
  if ((lambda_base.array() <= 0.0).any())
    throw std::invalid_argument(
        "make_quenching_model: lambda_base must be positive");
  if ((q.array() < 0.0).any() || (q.array() >= 1.0).any())
    throw std::invalid_argument(
        "make_quenching_model: q entries must lie in [0, 1)");
  Eigen::MatrixXd a = -(q.array().colwise() * lambda_base.array());
  return AffineRateModel(lambda_base, std::move(a));
}

}  // namespace psr
