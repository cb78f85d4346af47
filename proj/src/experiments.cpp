#include "poissparse/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <json.hpp>
#include <set>
#include <stdexcept>
#include <thread>

#include "poissparse/bounds.hpp"
#include "poissparse/eval.hpp"
#include "poissparse/io.hpp"
#include "poissparse/rng.hpp"
#include "poissparse/simulate.hpp"
#include "poissparse/stats.hpp"

namespace psr {

using nlohmann::json;

int thread_count() {
  if (const char* env = std::getenv("POISSON_SPARSE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return int(v);
    throw std::invalid_argument(
        "POISSON_SPARSE_THREADS must be a positive integer");
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

Loss loss_from_estimator_name(const std::string& name) {
  if (name == "PoissonML") return Loss::PoissonNll;
  if (name == "RescaledLASSO") return Loss::RescaledLasso;
  if (name == "GaussianML") return Loss::LeastSquares;
  throw std::invalid_argument("unknown estimator '" + name +
                              "'; expected PoissonML, RescaledLASSO, or "
                              "GaussianML");
}

namespace {

// Seed-path stream tags; every random object in an experiment hangs off
// (master_seed, tag, cell indices..., trial).
constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kObsStream = 3;
constexpr std::uint64_t kReStream = 4;
constexpr std::uint64_t kFanoStream = 5;
constexpr std::uint64_t kBernsteinStream = 6;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown config key '" + it.key() + "' in " +
                                  where);
}

std::string constraint_mode_name(ConstraintMode mode) {
  return mode == ConstraintMode::SumAtMost ? "le" : "eq";
}

ConstraintMode constraint_mode_from_name(const std::string& name) {
  if (name == "le") return ConstraintMode::SumAtMost;
  if (name == "eq") return ConstraintMode::SumEquals;
  throw std::invalid_argument("constraint_mode must be 'le' or 'eq'");
}

Eigen::VectorXd base_rates_for(const ExperimentConfig& cfg, Eigen::Index n,
                               double lambda0) {
  if (cfg.lambda0_vector.size() > 0) {
    if (cfg.lambda0_vector.size() != n)
      throw std::invalid_argument(
          "lambda0_vector length must equal the sample size n");
    return cfg.lambda0_vector;
  }
  return Eigen::VectorXd::Constant(n, lambda0);
}

Eigen::MatrixXd matrix_for(const ExperimentConfig& cfg, Eigen::Index n,
                           std::uint64_t seed) {
  MatrixSpec spec = cfg.matrix_spec;
  spec.n = n;
  spec.p = cfg.p;
  spec.seed = seed;
  return generate_matrix(spec);
}

ParamVector fit_estimator(Loss loss, const AffineRateModel& model,
                          const ObservationSet& y, double s,
                          const ExperimentConfig& cfg) {
  ConstraintSet constraints;
  constraints.amplitude = s;
  constraints.mode = cfg.constraint_mode;
  return minimize(loss, model, y, constraints, cfg.solver).w_hat;
}

std::string join_csv(const std::string& header,
                     const std::vector<std::string>& rows) {
  std::string out = header;
  out += '\n';
  for (const auto& row : rows) {
    out += row;
    out += '\n';
  }
  return out;
}

struct Outputs {
  std::string dir;
  Manifest manifest;

  explicit Outputs(const ExperimentConfig& cfg) : dir(cfg.output_dir) {
    std::filesystem::create_directories(dir);
    manifest.summary["schema_version"] = 1;
    manifest.summary["experiment"] = cfg.experiment;
    manifest.summary["config"] = config_to_json(cfg);
  }

  void add(const std::string& name, const std::string& content) {
    std::string path = dir + "/" + name;
    write_file(path, content);
    manifest.files.push_back(path);
  }

  Manifest finish() {
    manifest.summary["files"] = manifest.files;
    std::string path = dir + "/summary.json";
    write_file(path, manifest.summary.dump(2) + "\n");
    manifest.files.push_back(path);
    return manifest;
  }
};

// --- lambda-h-scaling ------------------------------------------------------

Manifest run_lambda_h_scaling(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.n_list.at(0);
  const Eigen::Index k = cfg.k_list.at(0);
  const int cells = int(cfg.s_list.size());
  const int tasks = cells * cfg.trials;

  std::vector<std::string> rows(static_cast<std::size_t>(tasks));
  std::vector<double> lambda_h(static_cast<std::size_t>(tasks));
  parallel_for(tasks, [&](int task) {
    const int ci = task / cfg.trials;
    const std::uint64_t t = std::uint64_t(task % cfg.trials);
    const double s = cfg.s_list[static_cast<std::size_t>(ci)];
    const std::uint64_t mseed =
        cfg.fix_matrix
            ? derive_seed(cfg.master_seed, {kMatrixStream, std::uint64_t(ci)})
            : derive_seed(cfg.master_seed,
                          {kMatrixStream, std::uint64_t(ci), t});
    AffineRateModel model(base_rates_for(cfg, n, cfg.lambda0),
                          matrix_for(cfg, n, mseed));
    ParamVector w_star = generate_sparse_signal(
        {cfg.p, k, s,
         derive_seed(cfg.master_seed, {kSignalStream, std::uint64_t(ci), t})});
    RateSummary summary = rate_summary(model, w_star);
    lambda_h[static_cast<std::size_t>(task)] = summary.lambda_harmonic;
    rows[static_cast<std::size_t>(task)] =
        format_double(s) + "," + std::to_string(t) + "," +
        format_double(summary.lambda_harmonic) + "," +
        format_double(summary.lambda_min) + "," +
        format_double(summary.lambda_max);
  });

  Outputs out(cfg);
  out.add("trials.csv",
          join_csv("s,trial,lambda_h,lambda_min,lambda_max", rows));

  std::vector<std::string> agg;
  std::vector<double> s_vals, mean_lh;
  for (int ci = 0; ci < cells; ++ci) {
    std::vector<double> cell(lambda_h.begin() + ci * cfg.trials,
                             lambda_h.begin() + (ci + 1) * cfg.trials);
    double m = mean(cell);
    s_vals.push_back(cfg.s_list[static_cast<std::size_t>(ci)]);
    mean_lh.push_back(m);
    agg.push_back(format_double(cfg.s_list[static_cast<std::size_t>(ci)]) + "," +
                  format_double(m) + "," +
                  format_double(stderr_of_mean(cell)));
  }
  out.add("aggregate.csv", join_csv("s,mean_lambda_h,stderr_lambda_h", agg));

  json results;
  if (cells >= 2) {
    LinearFit fit = linear_fit(s_vals, mean_lh);
    results["slope"] = fit.slope;
    results["intercept"] = fit.intercept;
    results["r2"] = fit.r2;
  }
  results["mean_lambda_h"] = mean_lh;
  results["s"] = s_vals;
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- tightness -------------------------------------------------------------

Manifest run_tightness(const ExperimentConfig& cfg) {
  const Loss loss = loss_from_estimator_name(cfg.estimators.at(0));

  struct Cell {
    Eigen::Index k, n;
    double s;
    int ki, ni, si;
    double gamma_hat = 0, lambda_h = 0, bound = 0, x = 0;
    bool zeta_floor_ok = true;
  };
  std::vector<Cell> cells;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni)
      for (std::size_t si = 0; si < cfg.s_list.size(); ++si)
        cells.push_back({cfg.k_list[ki], cfg.n_list[ni], cfg.s_list[si],
                         int(ki), int(ni), int(si)});

  // One matrix and one signal direction per (k, n); the s sweep rescales a
  // fixed direction so the bound and error share everything but the scale.
  std::vector<ParamVector> dirs;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
    dirs.push_back(generate_sparse_signal(
        {cfg.p, cfg.k_list[ki], 1.0,
         derive_seed(cfg.master_seed, {kSignalStream, std::uint64_t(ki)})}));

  std::vector<Eigen::MatrixXd> mats(cfg.k_list.size() * cfg.n_list.size());
  std::vector<double> gammas(mats.size());
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
      std::size_t idx = ki * cfg.n_list.size() + ni;
      mats[idx] = matrix_for(
          cfg, cfg.n_list[ni],
          derive_seed(cfg.master_seed,
                      {kMatrixStream, std::uint64_t(ki), std::uint64_t(ni)}));
      gammas[idx] =
          estimate_re(mats[idx], cfg.k_list[ki], cfg.re_trials,
                      derive_seed(cfg.master_seed,
                                  {kReStream, std::uint64_t(ki),
                                   std::uint64_t(ni)}))
              .gamma_hat;
    }

  for (Cell& cell : cells) {
    std::size_t idx =
        static_cast<std::size_t>(cell.ki) * cfg.n_list.size() + static_cast<std::size_t>(cell.ni);
    cell.gamma_hat = gammas[idx];
    ParamVector w_star(cell.s * dirs[static_cast<std::size_t>(cell.ki)].values);
    AffineRateModel model(base_rates_for(cfg, cell.n, cfg.lambda0), mats[idx]);
    RateSummary summary = rate_summary(model, w_star);
    cell.lambda_h = summary.lambda_harmonic;
    BoundInputs inp;
    inp.lambda_min = summary.lambda_min;
    inp.lambda_max = summary.lambda_max;
    inp.lambda_harmonic = summary.lambda_harmonic;
    inp.a_max = summary.a_max;
    inp.gamma_k = cell.gamma_hat;
    inp.k = cell.k;
    inp.n = cell.n;
    inp.zeta = cfg.zeta;
    cell.bound = theorem1_bound(inp);
    cell.x = cell.s / std::sqrt(double(cell.n) * cell.lambda_h);
    cell.zeta_floor_ok = zeta_floor_satisfied(inp);
  }

  const int tasks = int(cells.size()) * cfg.trials;
  std::vector<std::string> rows(static_cast<std::size_t>(tasks));
  std::vector<double> errors(static_cast<std::size_t>(tasks));
  parallel_for(tasks, [&](int task) {
    const Cell& cell = cells[static_cast<std::size_t>(task / cfg.trials)];
    const std::uint64_t t = std::uint64_t(task % cfg.trials);
    std::size_t idx =
        static_cast<std::size_t>(cell.ki) * cfg.n_list.size() + static_cast<std::size_t>(cell.ni);
    AffineRateModel model(base_rates_for(cfg, cell.n, cfg.lambda0), mats[idx]);
    ParamVector w_star(cell.s * dirs[static_cast<std::size_t>(cell.ki)].values);
    ObservationSet y = sample_observations(
        model, w_star,
        derive_seed(cfg.master_seed,
                    {kObsStream, std::uint64_t(cell.ki),
                     std::uint64_t(cell.ni), std::uint64_t(cell.si), t}));
    ParamVector w_hat = fit_estimator(loss, model, y, cell.s, cfg);
    double err = l2_error(w_hat, w_star);
    errors[static_cast<std::size_t>(task)] = err;
    rows[static_cast<std::size_t>(task)] =
        std::to_string(cell.k) + "," + std::to_string(cell.n) + "," +
        format_double(cell.s) + "," + std::to_string(t) + "," +
        format_double(cell.x) + "," + format_double(err) + "," +
        format_double(cell.bound) + "," + (err <= cell.bound ? "1" : "0");
  });

  Outputs out(cfg);
  out.add("trials.csv",
          join_csv("k,n,s,trial,s_over_sqrt_n_lambda_h,l2_error,"
                   "theorem1_bound,covered",
                   rows));

  std::vector<std::string> agg;
  std::vector<double> cell_bounds, cell_means;
  long long covered = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    std::vector<double> cell_err(errors.begin() + long(ci) * cfg.trials,
                                 errors.begin() + long(ci + 1) * cfg.trials);
    double m = mean(cell_err);
    long long hits = 0;
    for (double e : cell_err)
      if (e <= cell.bound) ++hits;
    covered += hits;
    cell_bounds.push_back(cell.bound);
    cell_means.push_back(m);
    agg.push_back(std::to_string(cell.k) + "," + std::to_string(cell.n) + "," +
                  format_double(cell.s) + "," + format_double(cell.x) + "," +
                  format_double(cell.gamma_hat) + "," +
                  format_double(cell.lambda_h) + "," +
                  format_double(cell.bound) + "," + format_double(m) + "," +
                  format_double(stderr_of_mean(cell_err)) + "," +
                  format_double(double(hits) / double(cfg.trials)) + "," +
                  (cell.zeta_floor_ok ? "1" : "0"));
  }
  out.add("aggregate.csv",
          join_csv("k,n,s,s_over_sqrt_n_lambda_h,gamma_hat,lambda_h,"
                   "theorem1_bound,mean_error,stderr_error,coverage,"
                   "zeta_floor_ok",
                   agg));

  // Per-trial x series for correlation/bracketing against the observed
  // errors; each cell contributes its x once per trial.
  std::vector<double> xs(static_cast<std::size_t>(tasks));
  for (int task = 0; task < tasks; ++task)
    xs[static_cast<std::size_t>(task)] =
        cells[static_cast<std::size_t>(task / cfg.trials)].x;

  json results;
  results["coverage_fraction"] = double(covered) / double(tasks);
  if (cells.size() >= 2) {
    results["pearson"] = pearson(xs, errors);
    double c0 = origin_fit_slope(xs, errors);
    results["origin_slope"] = c0;
    long long bracketed = 0;
    for (int task = 0; task < tasks; ++task) {
      double fitted = c0 * xs[static_cast<std::size_t>(task)];
      double err = errors[static_cast<std::size_t>(task)];
      if (err >= 0.5 * fitted && err <= 2.0 * fitted) ++bracketed;
    }
    results["bracket_fraction"] = double(bracketed) / double(tasks);
  }
  results["zeta"] = cfg.zeta;
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- gauss-vs-poisson ------------------------------------------------------

Manifest run_gauss_vs_poisson(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.n_list.at(0);
  const Eigen::Index k = cfg.k_list.at(0);
  const std::vector<double> lambdas =
      cfg.lambda0_sweep.empty() ? std::vector<double>{cfg.lambda0}
                                : cfg.lambda0_sweep;
  const int cells = int(lambdas.size() * cfg.s_list.size());
  const int tasks = cells * cfg.trials;

  std::vector<std::string> rows(static_cast<std::size_t>(tasks));
  std::vector<double> perr(static_cast<std::size_t>(tasks)), gerr(static_cast<std::size_t>(tasks));
  parallel_for(tasks, [&](int task) {
    const int ci = task / cfg.trials;
    const std::uint64_t t = std::uint64_t(task % cfg.trials);
    const std::uint64_t li = std::uint64_t(ci) / cfg.s_list.size();
    const std::uint64_t si = std::uint64_t(ci) % cfg.s_list.size();
    const double lambda0 = lambdas[li];
    const double s = cfg.s_list[si];
    const std::uint64_t mseed =
        cfg.fix_matrix
            ? derive_seed(cfg.master_seed, {kMatrixStream, li, si})
            : derive_seed(cfg.master_seed, {kMatrixStream, li, si, t});
    AffineRateModel model(base_rates_for(cfg, n, lambda0),
                          matrix_for(cfg, n, mseed));
    ParamVector w_star = generate_sparse_signal(
        {cfg.p, k, s,
         derive_seed(cfg.master_seed, {kSignalStream, li, si, t})});
    ObservationSet y = sample_observations(
        model, w_star,
        derive_seed(cfg.master_seed, {kObsStream, li, si, t}));
    double pe = l2_error(
        fit_estimator(Loss::PoissonNll, model, y, s, cfg), w_star);
    double ge = l2_error(
        fit_estimator(Loss::LeastSquares, model, y, s, cfg), w_star);
    perr[static_cast<std::size_t>(task)] = pe;
    gerr[static_cast<std::size_t>(task)] = ge;
    rows[static_cast<std::size_t>(task)] = format_double(lambda0) + "," + format_double(s) +
                              "," + std::to_string(t) + "," +
                              format_double(pe) + "," + format_double(ge);
  });

  Outputs out(cfg);
  out.add("trials.csv",
          join_csv("lambda0,s,trial,poisson_error,gaussian_error", rows));

  std::vector<std::string> agg;
  long long total_wins = 0;
  for (int ci = 0; ci < cells; ++ci) {
    std::vector<double> pc(perr.begin() + ci * cfg.trials,
                           perr.begin() + (ci + 1) * cfg.trials);
    std::vector<double> gc(gerr.begin() + ci * cfg.trials,
                           gerr.begin() + (ci + 1) * cfg.trials);
    long long wins = 0;
    for (int t = 0; t < cfg.trials; ++t)
      if (pc[static_cast<std::size_t>(t)] < gc[static_cast<std::size_t>(t)]) ++wins;
    total_wins += wins;
    const std::uint64_t li = std::uint64_t(ci) / cfg.s_list.size();
    const std::uint64_t si = std::uint64_t(ci) % cfg.s_list.size();
    agg.push_back(format_double(lambdas[li]) + "," +
                  format_double(cfg.s_list[si]) + "," +
                  format_double(mean(pc)) + "," + format_double(mean(gc)) +
                  "," + format_double(double(wins) / double(cfg.trials)));
  }
  out.add("aggregate.csv",
          join_csv("lambda0,s,mean_poisson_error,mean_gaussian_error,"
                   "poisson_win_fraction",
                   agg));

  json results;
  results["poisson_win_fraction"] = double(total_wins) / double(tasks);
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- support-vs-n / support-vs-k -------------------------------------------

Manifest run_support_sweep(const ExperimentConfig& cfg, bool sweep_k) {
  const std::vector<Eigen::Index>& sweep =
      sweep_k ? cfg.k_list : cfg.n_list;
  const double s = cfg.s_list.at(0);
  const int estimators = int(cfg.estimators.size());
  std::vector<Loss> losses;
  for (const auto& name : cfg.estimators)
    losses.push_back(loss_from_estimator_name(name));
  const int cells = int(sweep.size());
  const int tasks = cells * cfg.trials;

  struct Row {
    double err = 0;
    RecoveryMetrics m;
  };
  std::vector<std::string> rows(static_cast<std::size_t>(tasks));
  std::vector<Row> stats(static_cast<std::size_t>(tasks) * static_cast<std::size_t>(estimators));
  parallel_for(tasks, [&](int task) {
    const std::uint64_t ci = std::uint64_t(task / cfg.trials);
    const std::uint64_t t = std::uint64_t(task % cfg.trials);
    const Eigen::Index k = sweep_k ? sweep[ci] : cfg.k_list.at(0);
    const Eigen::Index n = sweep_k ? cfg.n_list.at(0) : sweep[ci];
    const double threshold = sweep_k ? cfg.threshold_over_k / double(k)
                             : cfg.thresholds.empty() ? 1e-4
                                                      : cfg.thresholds.at(0);
    const std::uint64_t mseed =
        cfg.fix_matrix ? derive_seed(cfg.master_seed, {kMatrixStream, ci})
                       : derive_seed(cfg.master_seed, {kMatrixStream, ci, t});
    AffineRateModel model(base_rates_for(cfg, n, cfg.lambda0),
                          matrix_for(cfg, n, mseed));
    ParamVector w_star = generate_sparse_signal(
        {cfg.p, k, s, derive_seed(cfg.master_seed, {kSignalStream, ci, t})});
    ObservationSet y = sample_observations(
        model, w_star, derive_seed(cfg.master_seed, {kObsStream, ci, t}));
    std::string line;
    for (int e = 0; e < estimators; ++e) {
      ParamVector w_hat = fit_estimator(losses[static_cast<std::size_t>(e)], model, y, s, cfg);
      RecoveryMetrics m = support_metrics(w_hat, w_star, threshold);
      stats[static_cast<std::size_t>(task) * static_cast<std::size_t>(estimators) + static_cast<std::size_t>(e)] = {
          m.l2_error, m};
      if (e) line += '\n';
      line += std::to_string(sweep[ci]) + "," + std::to_string(t) + "," +
              cfg.estimators[static_cast<std::size_t>(e)] + "," + format_double(m.l2_error) +
              "," + (m.support_success ? "1" : "0") + "," +
              std::to_string(m.detections) + "," +
              std::to_string(m.false_alarms);
    }
    rows[static_cast<std::size_t>(task)] = std::move(line);
  });

  Outputs out(cfg);
  const std::string axis = sweep_k ? "k" : "n";
  out.add("trials.csv",
          join_csv(axis + ",trial,estimator,l2_error,success,detections,"
                          "false_alarms",
                   rows));

  std::vector<std::string> agg;
  json per_estimator = json::object();
  for (int ci = 0; ci < cells; ++ci)
    for (int e = 0; e < estimators; ++e) {
      std::vector<double> errs;
      long long successes = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const Row& row = stats[static_cast<std::size_t>(ci * cfg.trials + t) *
                                   static_cast<std::size_t>(estimators) +
                               static_cast<std::size_t>(e)];
        errs.push_back(row.err);
        if (row.m.support_success) ++successes;
      }
      double frac = double(successes) / double(cfg.trials);
      agg.push_back(std::to_string(sweep[static_cast<std::size_t>(ci)]) + "," +
                    cfg.estimators[static_cast<std::size_t>(e)] + "," +
                    format_double(frac) + "," + format_double(mean(errs)));
      per_estimator[cfg.estimators[static_cast<std::size_t>(e)]]
                   [std::to_string(sweep[static_cast<std::size_t>(ci)])] = frac;
    }
  out.add("aggregate.csv",
          join_csv(axis + ",estimator,success_fraction,mean_l2_error", agg));

  json results;
  results["success_fraction"] = per_estimator;
  // Smallest swept value whose success fraction reaches 0.9, per estimator.
  for (int e = 0; e < estimators; ++e) {
    long long first = -1;
    for (int ci = 0; ci < cells && first < 0; ++ci) {
      double frac =
          per_estimator[cfg.estimators[static_cast<std::size_t>(e)]]
                       [std::to_string(sweep[static_cast<std::size_t>(ci)])]
                           .get<double>();
      if (frac >= 0.9) first = sweep[static_cast<std::size_t>(ci)];
    }
    results["first_" + axis + "_at_090"][cfg.estimators[static_cast<std::size_t>(e)]] =
        first;
  }
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- roc -------------------------------------------------------------------

Manifest run_roc(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.n_list.at(0);
  const Eigen::Index k = cfg.k_list.at(0);
  const double s = cfg.s_list.at(0);
  std::vector<Loss> losses;
  for (const auto& name : cfg.estimators)
    losses.push_back(loss_from_estimator_name(name));
  const int estimators = int(losses.size());

  std::vector<double> thresholds = cfg.thresholds;
  if (thresholds.empty()) {
    // Geometric grid from the per-coordinate mean s/k down six decades.
    const double top = s / double(k);
    const double ratio = std::pow(1e-6, 1.0 / 24.0);
    double t = top;
    for (int i = 0; i < 25; ++i, t *= ratio) thresholds.push_back(t);
  }

  std::vector<std::string> rows(static_cast<std::size_t>(cfg.trials));
  std::vector<std::vector<ParamVector>> hats(static_cast<std::size_t>(estimators));
  std::vector<ParamVector> stars;
  for (int e = 0; e < estimators; ++e)
    hats[static_cast<std::size_t>(e)].assign(static_cast<std::size_t>(cfg.trials),
                                ParamVector(Eigen::VectorXd::Zero(cfg.p)));
  stars.assign(static_cast<std::size_t>(cfg.trials),
               ParamVector(Eigen::VectorXd::Zero(cfg.p)));

  parallel_for(cfg.trials, [&](int trial) {
    const std::uint64_t t = std::uint64_t(trial);
    const std::uint64_t mseed =
        cfg.fix_matrix ? derive_seed(cfg.master_seed, {kMatrixStream})
                       : derive_seed(cfg.master_seed, {kMatrixStream, t});
    AffineRateModel model(base_rates_for(cfg, n, cfg.lambda0),
                          matrix_for(cfg, n, mseed));
    ParamVector w_star = generate_sparse_signal(
        {cfg.p, k, s, derive_seed(cfg.master_seed, {kSignalStream, t})});
    ObservationSet y = sample_observations(
        model, w_star, derive_seed(cfg.master_seed, {kObsStream, t}));
    std::string line;
    for (int e = 0; e < estimators; ++e) {
      ParamVector w_hat = fit_estimator(losses[static_cast<std::size_t>(e)], model, y, s, cfg);
      double err = l2_error(w_hat, w_star);
      if (e) line += '\n';
      line += std::to_string(t) + "," + cfg.estimators[static_cast<std::size_t>(e)] + "," +
              format_double(err);
      hats[static_cast<std::size_t>(e)][static_cast<std::size_t>(trial)] = std::move(w_hat);
    }
    stars[static_cast<std::size_t>(trial)] = std::move(w_star);
    rows[static_cast<std::size_t>(trial)] = std::move(line);
  });

  Outputs out(cfg);
  out.add("trials.csv", join_csv("trial,estimator,l2_error", rows));

  std::vector<std::string> agg;
  json auc = json::object();
  for (int e = 0; e < estimators; ++e) {
    auto points = roc_curve(hats[static_cast<std::size_t>(e)], stars, thresholds);
    std::vector<double> pf, pd;
    for (const auto& pt : points) {
      pf.push_back(pt.pf);
      pd.push_back(pt.pd);
      agg.push_back(cfg.estimators[static_cast<std::size_t>(e)] + "," +
                    format_double(pt.threshold) + "," + format_double(pt.pd) +
                    "," + format_double(pt.pf));
    }
    auc[cfg.estimators[static_cast<std::size_t>(e)]] = trapezoid_auc(pf, pd);
  }
  out.add("aggregate.csv", join_csv("estimator,threshold,pd,pf", agg));

  json results;
  results["auc"] = auc;
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- bounds-report ---------------------------------------------------------

Manifest run_bounds_report(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.n_list.at(0);
  const Eigen::Index k = cfg.k_list.at(0);
  const double s = cfg.s_list.at(0);

  AffineRateModel model(
      base_rates_for(cfg, n, cfg.lambda0),
      matrix_for(cfg, n, derive_seed(cfg.master_seed, {kMatrixStream})));
  ParamVector w_star = generate_sparse_signal(
      {cfg.p, k, s, derive_seed(cfg.master_seed, {kSignalStream})});
  RateSummary summary = rate_summary(model, w_star);
  REEstimate re =
      estimate_re(model.matrix, k, cfg.re_trials,
                  derive_seed(cfg.master_seed, {kReStream}));

  BoundInputs inp;
  inp.lambda_min = summary.lambda_min;
  inp.lambda_max = summary.lambda_max;
  inp.lambda_harmonic = summary.lambda_harmonic;
  inp.a_max = summary.a_max;
  inp.gamma_k = re.gamma_hat;
  inp.k = k;
  inp.n = n;
  inp.zeta = cfg.zeta;
  ScConstants sc = sc_constants(inp);
  double upper = theorem1_bound(inp);

  json results;
  results["lambda_min"] = summary.lambda_min;
  results["lambda_max"] = summary.lambda_max;
  results["lambda_h"] = summary.lambda_harmonic;
  results["a_min"] = summary.a_min;
  results["a_max"] = summary.a_max;
  results["gamma_hat"] = re.gamma_hat;
  results["kappa"] = sc.kappa;
  results["tau"] = sc.tau;
  results["nu_n"] = sc.nu_n;
  results["delta"] = sc.delta;
  results["theorem1_bound"] = upper;
  results["zeta_floor_ok"] = sc.zeta_floor_ok;

  std::string fano_field = "nan";
  try {
    FanoResult fano = fano_lower_bound(
        model, s, k, cfg.fano_c,
        derive_seed(cfg.master_seed, {kFanoStream}), cfg.fano_sample_size_c);
    results["fano_bound"] = fano.bound;
    results["fano_eta"] = fano.diagnostics.eta;
    results["fano_avg_kl"] = fano.diagnostics.avg_kl;
    results["fano_log_m"] = fano.diagnostics.log_m;
    results["fano_kl_ok"] = fano.diagnostics.kl_ok;
    results["fano_ratio_ok"] = fano.diagnostics.fano_ratio_ok;
    fano_field = format_double(fano.bound);
  } catch (const InfeasibleRegimeError& e) {
    results["fano_infeasible"] = e.what();
  } catch (const std::invalid_argument& e) {
    results["fano_infeasible"] = e.what();
  }

  Outputs out(cfg);
  std::string row =
      std::to_string(k) + "," + std::to_string(n) + "," + format_double(s) +
      "," + format_double(summary.lambda_min) + "," +
      format_double(summary.lambda_max) + "," +
      format_double(summary.lambda_harmonic) + "," +
      format_double(re.gamma_hat) + "," + format_double(sc.kappa) + "," +
      format_double(sc.tau) + "," + format_double(sc.nu_n) + "," +
      format_double(sc.delta) + "," + format_double(upper) + "," + fano_field;
  out.add("trials.csv",
          join_csv("k,n,s,lambda_min,lambda_max,lambda_h,gamma_hat,kappa,tau,"
                   "nu_n,delta,theorem1_bound,fano_bound",
                   {row}));
  out.manifest.summary["results"] = results;
  return out.finish();
}

// --- bernstein-check -------------------------------------------------------

Manifest run_bernstein_check(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.n_list.at(0);
  const Eigen::Index k = cfg.k_list.at(0);
  const double s = cfg.s_list.at(0);
  const std::vector<double> lambdas =
      cfg.lambda0_sweep.empty() ? std::vector<double>{cfg.lambda0}
                                : cfg.lambda0_sweep;
  const int cells = int(lambdas.size());
  const int tasks = cells * cfg.trials;

  struct Cell {
    Eigen::VectorXd lam;
    double radius = 0, lambda_h = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Cell> cell_data(static_cast<std::size_t>(cells));
  for (int ci = 0; ci < cells; ++ci) {
    AffineRateModel model(
        base_rates_for(cfg, n, lambdas[static_cast<std::size_t>(ci)]),
        matrix_for(cfg, n,
                   derive_seed(cfg.master_seed,
                               {kMatrixStream, std::uint64_t(ci)})));
    ParamVector w_star = generate_sparse_signal(
        {cfg.p, k, s,
         derive_seed(cfg.master_seed, {kSignalStream, std::uint64_t(ci)})});
    Cell& cell = cell_data[static_cast<std::size_t>(ci)];
    cell.lam = rates(model, w_star);
    cell.lambda_h = rate_summary(model, w_star).lambda_harmonic;
    cell.radius =
        2.0 * std::sqrt(std::log(2.0 / cfg.zeta) /
                        (double(n) * cell.lambda_h));
    cell.seed =
        derive_seed(cfg.master_seed, {kBernsteinStream, std::uint64_t(ci)});
  }

  std::vector<std::string> rows(static_cast<std::size_t>(tasks));
  std::vector<int> hit(static_cast<std::size_t>(tasks));
  parallel_for(tasks, [&](int task) {
    const int ci = task / cfg.trials;
    const std::uint64_t t = std::uint64_t(task % cfg.trials);
    const Cell& cell = cell_data[static_cast<std::size_t>(ci)];
    Rng rng(derive_seed(cell.seed, {t}));
    double stat = 0.0;
    for (Eigen::Index i = 0; i < cell.lam.size(); ++i)
      stat += std::fabs(double(rng.poisson(cell.lam[i])) / cell.lam[i] - 1.0);
    stat /= double(n);
    hit[static_cast<std::size_t>(task)] = stat <= cell.radius ? 1 : 0;
    rows[static_cast<std::size_t>(task)] =
        format_double(lambdas[static_cast<std::size_t>(ci)]) + "," + std::to_string(t) +
        "," + format_double(stat) + "," + format_double(cell.radius) + "," +
        std::to_string(hit[static_cast<std::size_t>(task)]);
  });

  Outputs out(cfg);
  out.add("trials.csv", join_csv("lambda0,trial,stat,radius,within", rows));

  std::vector<std::string> agg;
  json coverage = json::object();
  for (int ci = 0; ci < cells; ++ci) {
    long long hits = 0;
    for (int t = 0; t < cfg.trials; ++t) hits += hit[static_cast<std::size_t>(ci * cfg.trials + t)];
    double frac = double(hits) / double(cfg.trials);
    coverage[format_double(lambdas[static_cast<std::size_t>(ci)])] = frac;
    agg.push_back(format_double(lambdas[static_cast<std::size_t>(ci)]) + "," +
                  format_double(cell_data[static_cast<std::size_t>(ci)].lambda_h) + "," +
                  format_double(cell_data[static_cast<std::size_t>(ci)].radius) + "," +
                  format_double(frac));
  }
  out.add("aggregate.csv", join_csv("lambda0,lambda_h,radius,coverage", agg));

  json results;
  results["coverage"] = coverage;
  results["zeta"] = cfg.zeta;
  out.manifest.summary["results"] = results;
  return out.finish();
}

}  // namespace

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> registry = {
      {"lambda-h-scaling",
       "harmonic-mean rate lambda_h of the fitted-rate vector as the signal "
       "amplitude s sweeps; checks the affine growth that drives the n "
       "lambda_h effective sample size",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "trials"}},
      {"tightness",
       "maximum-likelihood l2 error per (k, n, s) cell against the computed "
       "upper bound with an estimated restricted-eigenvalue constant",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "estimators",
        "trials", "zeta", "re_trials"}},
      {"gauss-vs-poisson",
       "paired l2 error of the Poisson and Gaussian maximum-likelihood "
       "estimators on the same draws, over base-rate and amplitude sweeps",
       {"p", "k_list", "n_list", "s_list", "lambda0", "lambda0_sweep",
        "matrix", "trials"}},
      {"support-vs-n",
       "exact support recovery frequency per estimator as the sample size "
       "sweeps, at a fixed detection threshold",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "estimators",
        "thresholds", "trials"}},
      {"support-vs-k",
       "exact support recovery frequency per estimator as the sparsity "
       "sweeps, with threshold threshold_over_k / k",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "estimators",
        "threshold_over_k", "trials"}},
      {"roc",
       "detection/false-alarm curves per estimator over a threshold grid, "
       "with trapezoidal area under the curve",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "estimators",
        "thresholds", "trials"}},
      {"bounds-report",
       "one-shot report of rate summary, restricted-eigenvalue estimate, "
       "strong-convexity constants, the upper bound, and the packing lower "
       "bound on a single generated instance",
       {"p", "k_list", "n_list", "s_list", "lambda0", "matrix", "zeta",
        "re_trials", "fano_c", "fano_sample_size_c"}},
      {"bernstein-check",
       "Monte Carlo frequency of the normalized deviation statistic falling "
       "inside its concentration radius, per base rate",
       {"p", "k_list", "n_list", "s_list", "lambda0", "lambda0_sweep",
        "matrix", "zeta", "trials"}},
  };
  return registry;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  check_keys(j,
             {"schema_version", "experiment", "p", "k_list", "n_list",
              "s_list", "lambda0", "lambda0_vector", "lambda0_sweep", "matrix",
              "estimators", "constraint_mode", "thresholds",
              "threshold_over_k", "trials", "master_seed", "output_dir",
              "fix_matrix", "zeta", "re_trials", "fano_c",
              "fano_sample_size_c", "solver"},
             "config");
  ExperimentConfig cfg;
  if (j.contains("schema_version")) {
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
      throw std::invalid_argument("unsupported schema_version");
  }
  cfg.experiment = j.at("experiment").get<std::string>();
  bool known = false;
  for (const auto& info : list_experiments())
    if (info.name == cfg.experiment) known = true;
  if (!known)
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");

  if (j.contains("p")) cfg.p = j.at("p").get<Eigen::Index>();
  if (j.contains("k_list"))
    cfg.k_list = j.at("k_list").get<std::vector<Eigen::Index>>();
  if (j.contains("n_list"))
    cfg.n_list = j.at("n_list").get<std::vector<Eigen::Index>>();
  if (j.contains("s_list"))
    cfg.s_list = j.at("s_list").get<std::vector<double>>();
  if (j.contains("lambda0")) cfg.lambda0 = j.at("lambda0").get<double>();
  if (j.contains("lambda0_vector")) {
    auto v = j.at("lambda0_vector").get<std::vector<double>>();
    cfg.lambda0_vector =
        Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
  }
  if (j.contains("lambda0_sweep"))
    cfg.lambda0_sweep = j.at("lambda0_sweep").get<std::vector<double>>();
  if (j.contains("matrix")) {
    const json& m = j.at("matrix");
    check_keys(m, {"kind", "alpha", "beta", "mu", "sigma", "a_wedge", "a_vee"},
               "matrix");
    cfg.matrix_spec = matrix_spec_from_json(m);
  }
  if (j.contains("estimators")) {
    cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (cfg.estimators.empty())
      throw std::invalid_argument("estimators must be non-empty");
    for (const auto& name : cfg.estimators) loss_from_estimator_name(name);
  }
  if (j.contains("constraint_mode"))
    cfg.constraint_mode =
        constraint_mode_from_name(j.at("constraint_mode").get<std::string>());
  if (j.contains("thresholds"))
    cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
  if (j.contains("threshold_over_k"))
    cfg.threshold_over_k = j.at("threshold_over_k").get<double>();
  if (j.contains("trials")) {
    cfg.trials = j.at("trials").get<int>();
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  }
  if (j.contains("master_seed"))
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("output_dir"))
    cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("fix_matrix")) cfg.fix_matrix = j.at("fix_matrix").get<bool>();
  if (j.contains("zeta")) {
    cfg.zeta = j.at("zeta").get<double>();
    if (!(cfg.zeta > 0.0 && cfg.zeta < 1.0))
      throw std::invalid_argument("zeta must lie in (0, 1)");
  }
  if (j.contains("re_trials")) cfg.re_trials = j.at("re_trials").get<int>();
  if (j.contains("fano_c")) cfg.fano_c = j.at("fano_c").get<double>();
  if (j.contains("fano_sample_size_c"))
    cfg.fano_sample_size_c = j.at("fano_sample_size_c").get<double>();
  if (j.contains("solver")) {
    const json& sj = j.at("solver");
    check_keys(sj,
               {"obj_tol", "step_tol", "max_iters", "armijo_c",
                "backtrack_ratio", "warm_start_from_ls"},
               "solver");
    if (sj.contains("obj_tol")) cfg.solver.obj_tol = sj.at("obj_tol").get<double>();
    if (sj.contains("step_tol"))
      cfg.solver.step_tol = sj.at("step_tol").get<double>();
    if (sj.contains("max_iters"))
      cfg.solver.max_iters = sj.at("max_iters").get<int>();
    if (sj.contains("armijo_c"))
      cfg.solver.armijo_c = sj.at("armijo_c").get<double>();
    if (sj.contains("backtrack_ratio"))
      cfg.solver.backtrack_ratio = sj.at("backtrack_ratio").get<double>();
    if (sj.contains("warm_start_from_ls"))
      cfg.solver.warm_start_from_ls = sj.at("warm_start_from_ls").get<bool>();
  }
  if (cfg.p < 1 || cfg.k_list.empty() || cfg.n_list.empty() ||
      cfg.s_list.empty())
    throw std::invalid_argument("p, k_list, n_list, s_list must be non-empty");
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["experiment"] = cfg.experiment;
  j["p"] = cfg.p;
  j["k_list"] = cfg.k_list;
  j["n_list"] = cfg.n_list;
  j["s_list"] = cfg.s_list;
  j["lambda0"] = cfg.lambda0;
  if (cfg.lambda0_vector.size() > 0)
    j["lambda0_vector"] = std::vector<double>(
        cfg.lambda0_vector.data(),
        cfg.lambda0_vector.data() + cfg.lambda0_vector.size());
  if (!cfg.lambda0_sweep.empty()) j["lambda0_sweep"] = cfg.lambda0_sweep;
  {
    json m = matrix_spec_to_json(cfg.matrix_spec);
    m.erase("n");
    m.erase("p");
    m.erase("seed");
    j["matrix"] = std::move(m);
  }
  j["estimators"] = cfg.estimators;
  j["constraint_mode"] = constraint_mode_name(cfg.constraint_mode);
  if (!cfg.thresholds.empty()) j["thresholds"] = cfg.thresholds;
  j["threshold_over_k"] = cfg.threshold_over_k;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["fix_matrix"] = cfg.fix_matrix;
  j["zeta"] = cfg.zeta;
  j["re_trials"] = cfg.re_trials;
  j["fano_c"] = cfg.fano_c;
  j["fano_sample_size_c"] = cfg.fano_sample_size_c;
  json sj;
  sj["obj_tol"] = cfg.solver.obj_tol;
  sj["step_tol"] = cfg.solver.step_tol;
  sj["max_iters"] = cfg.solver.max_iters;
  sj["armijo_c"] = cfg.solver.armijo_c;
  sj["backtrack_ratio"] = cfg.solver.backtrack_ratio;
  sj["warm_start_from_ls"] = cfg.solver.warm_start_from_ls;
  j["solver"] = std::move(sj);
  return j;
}

Manifest run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "lambda-h-scaling") return run_lambda_h_scaling(cfg);
  if (cfg.experiment == "tightness") return run_tightness(cfg);
  if (cfg.experiment == "gauss-vs-poisson") return run_gauss_vs_poisson(cfg);
  if (cfg.experiment == "support-vs-n") return run_support_sweep(cfg, false);
  if (cfg.experiment == "support-vs-k") return run_support_sweep(cfg, true);
  if (cfg.experiment == "roc") return run_roc(cfg);
  if (cfg.experiment == "bounds-report") return run_bounds_report(cfg);
  if (cfg.experiment == "bernstein-check") return run_bernstein_check(cfg);
  throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace psr
