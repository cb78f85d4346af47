#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "poissparse/model.hpp"

namespace psr {

struct SignalSpec {
  Eigen::Index p = 1;
  Eigen::Index k = 1;
  double s = 1.0;
  std::uint64_t seed = 0;
};

// Support of size exactly k chosen uniformly at random; nonzero entries
// drawn Uniform(0, 1] and rescaled so the l1 mass equals s exactly.
ParamVector generate_sparse_signal(const SignalSpec& spec);

// Independent exact Poisson draws, one per model row; deterministic per
// seed. Rates may be zero (degenerate count 0) but not negative.
ObservationSet sample_observations(const AffineRateModel& model,
                                   const ParamVector& w_star,
                                   std::uint64_t seed);

// Quenching model lambda_i (1 - q_i . w) rewritten affinely: base rates
// lambda_base and matrix entries -lambda_i q_ij.
AffineRateModel make_quenching_model(const Eigen::VectorXd& lambda_base,
                                     const Eigen::MatrixXd& q);

}  // namespace psr
