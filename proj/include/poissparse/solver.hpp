#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "poissparse/model.hpp"

namespace psr {

enum class ConstraintMode { SumAtMost, SumEquals };

struct ConstraintSet {
  double amplitude = 1.0;  // s
  ConstraintMode mode = ConstraintMode::SumAtMost;
  double rate_floor = kRateFloor;
};

struct SolverConfig {
  double obj_tol = 1e-10;
  double step_tol = 1e-10;
  int max_iters = 50000;
  double armijo_c = 1e-4;
  double backtrack_ratio = 0.5;
  // For the non-convex rescaled LASSO: start from the least-squares
  // solution instead of the feasibility center.
  bool warm_start_from_ls = false;
};

enum class TerminationReason { Converged, MaxIters, NoDescentStep };

struct SolveResult {
  ParamVector w_hat;
  double objective = 0;
  int iterations = 0;
  bool converged = false;
  TerminationReason termination_reason = TerminationReason::Converged;
};

// Exact Euclidean projection onto {w >= 0, sum w <= s}.
Eigen::VectorXd project_nonneg_l1(const Eigen::VectorXd& v, double s);

// Exact Euclidean projection onto the simplex {w >= 0, sum w = s}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s);

// Projected gradient descent with Armijo backtracking. A trial step is
// also rejected whenever a likelihood-based loss would see a rate at or
// below the constraint's rate floor. The objective sequence is monotone
// non-increasing. Default start is the feasibility center s/p.
SolveResult minimize(Loss loss, const AffineRateModel& model,
                     const ObservationSet& y, const ConstraintSet& constraints,
                     const SolverConfig& config = {},
                     const std::optional<ParamVector>& w0 = std::nullopt);

// { i : w_i > t }, strict inequality.
std::vector<Eigen::Index> threshold_support(const ParamVector& w, double t);

}  // namespace psr
