#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace psr {

// Floor below which a Poisson rate is treated as out of domain rather
// than evaluating a loss at +-inf. Keeps line searches well-defined.
inline constexpr double kRateFloor = 1e-12;

// Thrown when a rate drops to or below the floor; carries the row index.
class RateDomainError : public std::domain_error {
 public:
  RateDomainError(Eigen::Index index, double rate)
      : std::domain_error("nonpositive rate " + std::to_string(rate) +
                          " at observation " + std::to_string(index)),
        index(index),
        rate(rate) {}
  Eigen::Index index;
  double rate;
};

// Observation model: y_i ~ Poisson(base_rates_i + matrix.row(i) . w).
// Immutable after construction.
struct AffineRateModel {
  Eigen::VectorXd base_rates;  // n, all >= 0
  Eigen::MatrixXd matrix;      // n x p, finite; negative entries allowed

  AffineRateModel(Eigen::VectorXd base, Eigen::MatrixXd mat);

  Eigen::Index n() const { return matrix.rows(); }
  Eigen::Index p() const { return matrix.cols(); }
};

// Nonnegative parameter vector; exposes its l1 mass and exact support.
struct ParamVector {
  Eigen::VectorXd values;

  explicit ParamVector(Eigen::VectorXd v);

  Eigen::Index dim() const { return values.size(); }
  double l1() const { return values.sum(); }
  std::vector<Eigen::Index> support() const;
  Eigen::Index sparsity() const { return Eigen::Index(support().size()); }
};

struct ObservationSet {
  Eigen::VectorXd counts;  // n nonnegative integers

  explicit ObservationSet(Eigen::VectorXd y);

  Eigen::Index n() const { return counts.size(); }
};

struct RateSummary {
  double lambda_min = 0;       // min_i lambda_i(w*)
  double lambda_max = 0;       // max_i base_rates_i + a_max * s
  double lambda_harmonic = 0;  // harmonic mean of lambda_i(w*)
  double a_max = 0;
  double a_min = 0;
};

struct LossEval {
  double value = 0;
  Eigen::VectorXd gradient;
};

enum class Loss { PoissonNll, RescaledLasso, LeastSquares };

Eigen::VectorXd rates(const AffineRateModel& model, const ParamVector& w);
Eigen::VectorXd rates(const AffineRateModel& model, const Eigen::VectorXd& w);

// Q(w) = (1/n) sum_i [-y_i log lambda_i(w) + lambda_i(w)]
LossEval poisson_nll(const AffineRateModel& model, const ObservationSet& y,
                     const Eigen::VectorXd& w);

// (1/n) sum_i (y_i - lambda_i(w))^2 / lambda_i(w)
LossEval rescaled_lasso_loss(const AffineRateModel& model,
                             const ObservationSet& y, const Eigen::VectorXd& w);

// (1/n) sum_i (y_i - lambda_i(w))^2; rates may be any sign here
LossEval least_squares_loss(const AffineRateModel& model,
                            const ObservationSet& y, const Eigen::VectorXd& w);

LossEval evaluate(Loss loss, const AffineRateModel& model,
                  const ObservationSet& y, const Eigen::VectorXd& w);

RateSummary rate_summary(const AffineRateModel& model,
                         const ParamVector& w_star);

}  // namespace psr
