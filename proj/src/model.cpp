#include "poissparse/model.hpp"

#include <cmath>

namespace psr {

AffineRateModel::AffineRateModel(Eigen::VectorXd base, Eigen::MatrixXd mat)
    : base_rates(std::move(base)), matrix(std::move(mat)) {
  if (base_rates.size() != matrix.rows())
    throw std::invalid_argument(
        "AffineRateModel: base_rates length must equal matrix row count");
  if ((base_rates.array() < 0.0).any())
    throw std::invalid_argument("AffineRateModel: base rates must be >= 0");
  if (!base_rates.allFinite() || !matrix.allFinite())
    throw std::invalid_argument("AffineRateModel: entries must be finite");
}

ParamVector::ParamVector(Eigen::VectorXd v) : values(std::move(v)) {
  if ((values.array() < 0.0).any())
    throw std::invalid_argument("ParamVector: entries must be >= 0");
  if (!values.allFinite())
    throw std::invalid_argument("ParamVector: entries must be finite");
}

std::vector<Eigen::Index> ParamVector::support() const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) idx.push_back(i);
  return idx;
}

ObservationSet::ObservationSet(Eigen::VectorXd y) : counts(std::move(y)) {
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (!(counts[i] >= 0.0) || counts[i] != std::floor(counts[i]))
      throw std::invalid_argument(
          "ObservationSet: counts must be nonnegative integers");
  }
}

Eigen::VectorXd rates(const AffineRateModel& model, const Eigen::VectorXd& w) {
  if (w.size() != model.p())
    throw std::invalid_argument("rates: dimension of w must equal model p");
  return model.base_rates + model.matrix * w;
}

Eigen::VectorXd rates(const AffineRateModel& model, const ParamVector& w) {
  return rates(model, w.values);
}

namespace {

// Rates must stay strictly above the floor for the likelihood-based losses.
Eigen::VectorXd checked_rates(const AffineRateModel& model,
                              const Eigen::VectorXd& w) {
  Eigen::VectorXd lam = rates(model, w);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (!(lam[i] > kRateFloor)) throw RateDomainError(i, lam[i]);
  return lam;
}

void check_dims(const AffineRateModel& model, const ObservationSet& y,
                const Eigen::VectorXd& w) {
  if (y.n() != model.n())
    throw std::invalid_argument("loss: observation count must equal model n");
  if (w.size() != model.p())
    throw std::invalid_argument("loss: dimension of w must equal model p");
}

}  // namespace

LossEval poisson_nll(const AffineRateModel& model, const ObservationSet& y,
                     const Eigen::VectorXd& w) {
  check_dims(model, y, w);
  const Eigen::VectorXd lam = checked_rates(model, w);
  const double inv_n = 1.0 / double(model.n());
  LossEval out;
  out.value =
      inv_n * (lam.array() - y.counts.array() * lam.array().log()).sum();
  // grad = (1/n) sum_i (1 - y_i/lambda_i) a_i
  Eigen::VectorXd row_weights =
      (1.0 - y.counts.array() / lam.array()).matrix() * inv_n;
  out.gradient = model.matrix.transpose() * row_weights;
  return out;
}

LossEval rescaled_lasso_loss(const AffineRateModel& model,
                             const ObservationSet& y,
                             const Eigen::VectorXd& w) {
  check_dims(model, y, w);
  const Eigen::VectorXd lam = checked_rates(model, w);
  const double inv_n = 1.0 / double(model.n());
  const Eigen::ArrayXd r = y.counts.array() - lam.array();
  LossEval out;
  out.value = inv_n * (r.square() / lam.array()).sum();
  // d/dw (r^2/lambda) = -r (2 lambda + r) / lambda^2 * a_i
  Eigen::VectorXd row_weights =
      (-r * (2.0 * lam.array() + r) / lam.array().square()).matrix() * inv_n;
  out.gradient = model.matrix.transpose() * row_weights;
  return out;
}

LossEval least_squares_loss(const AffineRateModel& model,
                            const ObservationSet& y, const Eigen::VectorXd& w) {
  check_dims(model, y, w);
  const Eigen::VectorXd lam = rates(model, w);
  const double inv_n = 1.0 / double(model.n());
  const Eigen::VectorXd r = lam - y.counts;
  LossEval out;
  out.value = inv_n * r.squaredNorm();
  out.gradient = (2.0 * inv_n) * (model.matrix.transpose() * r);
  return out;
}

LossEval evaluate(Loss loss, const AffineRateModel& model,
                  const ObservationSet& y, const Eigen::VectorXd& w) {
  switch (loss) {
    case Loss::PoissonNll:
      return poisson_nll(model, y, w);
    case Loss::RescaledLasso:
      return rescaled_lasso_loss(model, y, w);
    case Loss::LeastSquares:
      return least_squares_loss(model, y, w);
  }
  throw std::logic_error("evaluate: unknown loss");
}

RateSummary rate_summary(const AffineRateModel& model,
                         const ParamVector& w_star) {
  const Eigen::VectorXd lam = rates(model, w_star);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (!(lam[i] > kRateFloor)) throw RateDomainError(i, lam[i]);
  RateSummary s;
  s.lambda_min = lam.minCoeff();
  s.a_max = model.matrix.maxCoeff();
  s.a_min = model.matrix.minCoeff();
  // lambda_max uses max_i base_rate_i + a_max * s, the worst case over the
  // feasible set that theorem1_bound is defined with, not max_i lambda_i(w*).
  s.lambda_max = model.base_rates.maxCoeff() + s.a_max * w_star.l1();
  s.lambda_harmonic =
      double(model.n()) / lam.array().inverse().sum();
  return s;
}

}  // namespace psr
