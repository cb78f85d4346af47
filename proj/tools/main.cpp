#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>

#include "poissparse/bounds.hpp"
#include "poissparse/experiments.hpp"
#include "poissparse/io.hpp"
#include "poissparse/rng.hpp"
#include "poissparse/sensing.hpp"
#include "poissparse/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

void print_kv(const std::string& key, const std::string& value) {
  std::cout << key << ": " << value << "\n";
}

int cmd_run(const std::string& config_path) {
  psr::ExperimentConfig cfg =
      psr::config_from_json(nlohmann::json::parse(psr::read_file(config_path)));
  psr::Manifest manifest = psr::run_experiment(cfg);
  for (const auto& file : manifest.files) std::cout << file << "\n";
  return kExitOk;
}

int cmd_list() {
  for (const auto& info : psr::list_experiments()) {
    std::cout << info.name << "\n  " << info.description << "\n  keys:";
    for (const auto& key : info.config_keys) std::cout << " " << key;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_bounds(const std::string& model_path, Eigen::Index k, double s,
               double zeta, double gamma_k, double c, double sample_size_c,
               int re_trials, std::uint64_t seed) {
  psr::AffineRateModel model = psr::load_model(model_path);
  if (k < 1 || k > model.p())
    throw std::invalid_argument("--k must lie in [1, p]");
  if (!(s > 0.0)) throw std::invalid_argument("--s must be > 0");

  // The error-bound formulas are evaluated at the feasibility center s/p,
  // the solver's default starting point.
  psr::ParamVector w_center(
      Eigen::VectorXd::Constant(model.p(), s / double(model.p())));
  psr::RateSummary summary = psr::rate_summary(model, w_center);
  if (gamma_k <= 0.0)
    gamma_k = psr::estimate_re(model.matrix, k, re_trials,
                               psr::derive_seed(seed, {4}))
                  .gamma_hat;

  psr::BoundInputs inp;
  inp.lambda_min = summary.lambda_min;
  inp.lambda_max = summary.lambda_max;
  inp.lambda_harmonic = summary.lambda_harmonic;
  inp.a_max = summary.a_max;
  inp.gamma_k = gamma_k;
  inp.k = k;
  inp.n = model.n();
  inp.zeta = zeta;
  psr::ScConstants sc = psr::sc_constants(inp);

  print_kv("n", std::to_string(model.n()));
  print_kv("p", std::to_string(model.p()));
  print_kv("k", std::to_string(k));
  print_kv("s", psr::format_double(s));
  print_kv("zeta", psr::format_double(zeta));
  print_kv("lambda_min", psr::format_double(summary.lambda_min));
  print_kv("lambda_max", psr::format_double(summary.lambda_max));
  print_kv("lambda_h", psr::format_double(summary.lambda_harmonic));
  print_kv("a_min", psr::format_double(summary.a_min));
  print_kv("a_max", psr::format_double(summary.a_max));
  print_kv("gamma_k", psr::format_double(gamma_k));
  print_kv("kappa", psr::format_double(sc.kappa));
  print_kv("tau", psr::format_double(sc.tau));
  print_kv("nu_n", psr::format_double(sc.nu_n));
  print_kv("delta", psr::format_double(sc.delta));
  print_kv("theorem1_bound", psr::format_double(psr::theorem1_bound(inp)));
  print_kv("zeta_floor_ok", sc.zeta_floor_ok ? "true" : "false");
  try {
    psr::FanoResult fano = psr::fano_lower_bound(
        model, s, k, c, psr::derive_seed(seed, {5}), sample_size_c);
    print_kv("fano_bound", psr::format_double(fano.bound));
    print_kv("fano_eta", psr::format_double(fano.diagnostics.eta));
    print_kv("fano_avg_kl", psr::format_double(fano.diagnostics.avg_kl));
    print_kv("fano_log_m", psr::format_double(fano.diagnostics.log_m));
    print_kv("fano_kl_ok", fano.diagnostics.kl_ok ? "true" : "false");
    print_kv("fano_ratio_ok",
             fano.diagnostics.fano_ratio_ok ? "true" : "false");
  } catch (const psr::InfeasibleRegimeError& e) {
    print_kv("fano_bound", "infeasible");
    print_kv("fano_infeasible_reason", e.what());
  } catch (const std::invalid_argument& e) {
    print_kv("fano_bound", "infeasible");
    print_kv("fano_infeasible_reason", e.what());
  }
  return kExitOk;
}

int cmd_solve(const std::string& model_path, const std::string& y_path,
              const std::string& loss_name, double s,
              const std::string& mode_name, const psr::SolverConfig& solver) {
  psr::AffineRateModel model = psr::load_model(model_path);
  psr::ObservationSet y(psr::load_vector_csv(y_path));
  psr::Loss loss;
  if (loss_name == "poisson")
    loss = psr::Loss::PoissonNll;
  else if (loss_name == "rlasso")
    loss = psr::Loss::RescaledLasso;
  else if (loss_name == "ls")
    loss = psr::Loss::LeastSquares;
  else
    throw std::invalid_argument("--loss must be poisson, rlasso, or ls");
  if (!(s > 0.0)) throw std::invalid_argument("--s must be > 0");

  psr::ConstraintSet constraints;
  constraints.amplitude = s;
  constraints.mode = mode_name == "eq" ? psr::ConstraintMode::SumEquals
                                       : psr::ConstraintMode::SumAtMost;
  psr::SolveResult result = psr::minimize(loss, model, y, constraints, solver);
  for (Eigen::Index i = 0; i < result.w_hat.dim(); ++i)
    std::cout << psr::format_double(result.w_hat.values[i]) << "\n";
  std::cerr << "objective=" << psr::format_double(result.objective)
            << " iterations=" << result.iterations
            << " converged=" << (result.converged ? "true" : "false") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sparse nonnegative recovery from Poisson observations: constrained "
      "maximum likelihood, baselines, error bounds, and a deterministic "
      "experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config JSON")->required();

  auto* list = app.add_subcommand("list", "list registered experiments");

  std::string bounds_model;
  Eigen::Index bounds_k = 1;
  double bounds_s = 1.0, bounds_zeta = 0.1, bounds_gamma = 0.0;
  double bounds_c = 34.0, bounds_sample_c = 1.0;
  int bounds_re_trials = 50;
  std::uint64_t bounds_seed = 0;
  auto* bounds =
      app.add_subcommand("bounds", "print upper/lower bound constants for a "
                                   "model at the feasibility center");
  bounds->add_option("model", bounds_model, "model JSON")->required();
  bounds->add_option("--k", bounds_k, "sparsity level")->required();
  bounds->add_option("--s", bounds_s, "signal amplitude")->required();
  bounds->add_option("--zeta", bounds_zeta, "confidence parameter in (0,1)");
  bounds->add_option("--gamma-k", bounds_gamma,
                     "restricted-eigenvalue constant; estimated if omitted");
  bounds->add_option("--c", bounds_c, "packing constant (>= 34)");
  bounds->add_option("--sample-size-c", bounds_sample_c,
                     "constant in the lower-bound sample-size precondition");
  bounds->add_option("--re-trials", bounds_re_trials,
                     "cone samples per sparsity level when estimating gamma_k");
  bounds->add_option("--seed", bounds_seed, "seed for estimation streams");

  std::string solve_model, solve_y, solve_loss = "poisson", solve_mode = "le";
  double solve_s = 1.0;
  psr::SolverConfig solver;
  auto* solve =
      app.add_subcommand("solve", "fit one estimator on a model and counts");
  solve->add_option("model", solve_model, "model JSON")->required();
  solve->add_option("y", solve_y, "observed counts CSV, one per line")
      ->required();
  solve->add_option("--loss", solve_loss, "poisson, rlasso, or ls")
      ->check(CLI::IsMember({"poisson", "rlasso", "ls"}));
  solve->add_option("--s", solve_s, "constraint amplitude")->required();
  solve->add_option("--mode", solve_mode, "le (sum <= s) or eq (sum == s)")
      ->check(CLI::IsMember({"le", "eq"}));
  solve->add_option("--obj-tol", solver.obj_tol, "objective decrease tolerance");
  solve->add_option("--step-tol", solver.step_tol, "step-size tolerance");
  solve->add_option("--max-iters", solver.max_iters, "iteration cap");
  solve->add_flag("--warm-start-ls", solver.warm_start_from_ls,
                  "start from the least-squares solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*list) return cmd_list();
    if (*bounds)
      return cmd_bounds(bounds_model, bounds_k, bounds_s, bounds_zeta,
                        bounds_gamma, bounds_c, bounds_sample_c,
                        bounds_re_trials, bounds_seed);
    if (*solve)
      return cmd_solve(solve_model, solve_y, solve_loss, solve_s, solve_mode,
                       solver);
  } catch (const psr::InfeasibleRegimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
