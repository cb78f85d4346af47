#pragma once

#include <Eigen/Core>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "poissparse/sensing.hpp"
#include "poissparse/solver.hpp"

namespace psr {

// JSON-driven configuration of a registry experiment. Unknown keys are
// rejected so a misspelled sweep key cannot silently fall back to a
// default.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;
  Eigen::Index p = 400;
  std::vector<Eigen::Index> k_list{5};
  std::vector<Eigen::Index> n_list{100};
  std::vector<double> s_list{100.0};
  double lambda0 = 4.0;
  Eigen::VectorXd lambda0_vector;     // overrides the scalar when non-empty
  std::vector<double> lambda0_sweep;  // gauss-vs-poisson base-rate sweep
  MatrixSpec matrix_spec;             // n/p/seed filled per cell
  std::vector<std::string> estimators{"PoissonML"};
  ConstraintMode constraint_mode = ConstraintMode::SumAtMost;
  std::vector<double> thresholds;
  double threshold_over_k = 0.01;  // support-vs-k: t = this / k
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  bool fix_matrix = true;  // one matrix per cell instead of per trial
  double zeta = 0.1;
  int re_trials = 50;
  double fano_c = 34.0;
  double fano_sample_size_c = 1.0;
  SolverConfig solver;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::vector<std::string> config_keys;  // keys the experiment consumes
};

// Stable-ordered registry listing.
const std::vector<ExperimentInfo>& list_experiments();

struct Manifest {
  std::vector<std::string> files;  // paths written, in order
  nlohmann::json summary;
};

// Runs the named experiment: per grid cell and trial, derives a seed from
// (master_seed, cell, trial), generates the instance, runs the requested
// estimators, and writes per-trial CSV, per-cell aggregate CSV, and a
// summary JSON echoing the config. Identical configs produce byte-identical
// files regardless of worker count.
Manifest run_experiment(const ExperimentConfig& config);

// Worker pool size: POISSON_SPARSE_THREADS if set, else hardware threads.
int thread_count();

// Runs fn(i) for i in [0, count) on the worker pool; rethrows the first
// exception.
void parallel_for(int count, const std::function<void(int)>& fn);

Loss loss_from_estimator_name(const std::string& name);

}  // namespace psr
