#include "poissparse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace psr {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("project_simplex: s must be > 0");
  const Eigen::Index p = v.size();
  std::vector<double> u(v.data(), v.data() + p);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  Eigen::Index rho = 0;
  double cum_at_rho = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    cumsum += u[std::size_t(j)];
    if (u[std::size_t(j)] - (cumsum - s) / double(j + 1) > 0.0) {
      rho = j + 1;
      cum_at_rho = cumsum;
    }
  }
  theta = (cum_at_rho - s) / double(rho);
  return (v.array() - theta).max(0.0);
}

Eigen::VectorXd project_nonneg_l1(const Eigen::VectorXd& v, double s) {
  if (!(s > 0.0))
    throw std::invalid_argument("project_nonneg_l1: s must be > 0");
  Eigen::VectorXd w = v.array().max(0.0);
  if (w.sum() <= s) return w;
  // clipped sum exceeds s: the sum constraint is active at the projection
  return project_simplex(v, s);
}

std::vector<Eigen::Index> threshold_support(const ParamVector& w, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("threshold_support: t >= 0");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.values.size(); ++i)
    if (w.values[i] > t) idx.push_back(i);
  return idx;
}

namespace {

bool needs_positive_rates(Loss loss) { return loss != Loss::LeastSquares; }

// Objective value only (one matrix-vector product); nullopt when a rate
// violates the floor.
std::optional<double> loss_value(Loss loss, const AffineRateModel& model,
                                 const ObservationSet& y,
                                 const Eigen::VectorXd& w, double floor) {
  Eigen::VectorXd lam = model.base_rates + model.matrix * w;
  if (needs_positive_rates(loss) && !(lam.array() > floor).all())
    return std::nullopt;
  const double inv_n = 1.0 / double(model.n());
  switch (loss) {
    case Loss::PoissonNll:
      return inv_n * (lam.array() - y.counts.array() * lam.array().log()).sum();
    case Loss::RescaledLasso: {
      Eigen::ArrayXd r = y.counts.array() - lam.array();
      return inv_n * (r.square() / lam.array()).sum();
    }
    case Loss::LeastSquares:
      return inv_n * (lam - y.counts).squaredNorm();
  }
  return std::nullopt;
}

Eigen::VectorXd project(const Eigen::VectorXd& v, const ConstraintSet& c) {
  return c.mode == ConstraintMode::SumEquals
             ? project_simplex(v, c.amplitude)
             : project_nonneg_l1(v, c.amplitude);
}

bool is_feasible(const Eigen::VectorXd& w, const ConstraintSet& c,
                 double tol = 1e-9) {
  if ((w.array() < -tol).any()) return false;
  double total = w.sum();
  if (c.mode == ConstraintMode::SumEquals) return std::fabs(total - c.amplitude) <= tol;
  return total <= c.amplitude + tol;
}

}  // namespace

SolveResult minimize(Loss loss, const AffineRateModel& model,
                     const ObservationSet& y, const ConstraintSet& constraints,
                     const SolverConfig& config,
                     const std::optional<ParamVector>& w0) {
  if (!(constraints.amplitude > 0.0))
    throw std::invalid_argument("minimize: amplitude must be > 0");
  if (!(constraints.rate_floor > 0.0))
    throw std::invalid_argument("minimize: rate_floor must be > 0");
  if (config.max_iters < 1 || !(config.obj_tol > 0.0) ||
      !(config.step_tol > 0.0) || !(config.armijo_c > 0.0) ||
      config.armijo_c >= 1.0 || !(config.backtrack_ratio > 0.0) ||
      config.backtrack_ratio >= 1.0)
    throw std::invalid_argument("minimize: invalid solver configuration");

  const Eigen::Index p = model.p();
  Eigen::VectorXd center =
      Eigen::VectorXd::Constant(p, constraints.amplitude / double(p));

  Eigen::VectorXd x;
  if (w0) {
    x = w0->values;
    if (x.size() != p) throw std::invalid_argument("minimize: w0 dimension");
    if (!is_feasible(x, constraints))
      throw std::invalid_argument("minimize: w0 is infeasible");
  } else if (loss == Loss::RescaledLasso && config.warm_start_from_ls) {
    SolverConfig ls_cfg = config;
    ls_cfg.warm_start_from_ls = false;
    x = minimize(Loss::LeastSquares, model, y, constraints, ls_cfg)
            .w_hat.values;
    // pull toward the center until rates clear the floor
    for (int i = 0; i < 60 && !loss_value(loss, model, y, x,
                                          constraints.rate_floor);
         ++i)
      x = 0.5 * (x + center);
  } else {
    x = center;
  }

  auto f0 = loss_value(loss, model, y, x, constraints.rate_floor);
  if (!f0)
    throw std::domain_error("minimize: rates at the start violate the floor");
  if (!std::isfinite(*f0))
    throw std::domain_error("minimize: non-finite objective at the start");

  double fx = *f0;
  double step = 1.0;
  int iter = 0;
  TerminationReason reason = TerminationReason::MaxIters;

  for (; iter < config.max_iters; ++iter) {
    Eigen::VectorXd grad = evaluate(loss, model, y, x).gradient;

    bool accepted = false;
    Eigen::VectorXd cand;
    double fc = 0.0;
    double trial = step;
    while (trial > 1e-18) {
      cand = project(x - trial * grad, constraints);
      double inner = grad.dot(cand - x);
      auto val = loss_value(loss, model, y, cand, constraints.rate_floor);
      if (val && *val <= fx + config.armijo_c * inner) {
        accepted = true;
        fc = *val;
        break;
      }
      trial *= config.backtrack_ratio;
    }

    if (!accepted) {
      reason = TerminationReason::NoDescentStep;
      break;
    }

    double decrease = fx - fc;
    double move = (cand - x).norm();
    x = std::move(cand);
    fx = fc;
    step = std::min(trial * 2.0, 1e12);

    if (decrease < config.obj_tol && move < config.step_tol) {
      ++iter;
      reason = TerminationReason::Converged;
      break;
    }
  }

  SolveResult result{ParamVector(x.array().max(0.0)), fx, iter,
                     reason == TerminationReason::Converged, reason};
  return result;
}

}  // namespace psr
