#include "grip/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "grip/lp.hpp"

namespace grip {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void check_levels(const std::vector<double>& alpha_levels) {
  if (alpha_levels.empty()) {
    throw std::invalid_argument("alpha level grid is empty");
  }
  for (double a : alpha_levels) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("test level must lie in (0, 1)");
    }
  }
}

void check_sparsity(int s, int p) {
  if (s < 1) {
    throw std::invalid_argument("sparsity must be positive");
  }
  if ((3 * s) / 2 > p) {
    throw std::invalid_argument(
        "sparsity too large: the support rule needs floor(3s/2) <= p");
  }
}

struct RepOutcome {
  std::vector<unsigned char> reject;
  bool infeasible = false;
  double violation = -std::numeric_limits<double>::infinity();
  double seconds = 0.0;
};

RepOutcome run_single_rep(const ExperimentConfig& cfg, int s, double h,
                          const RngStream& rep_master) {
  const auto start = std::chrono::steady_clock::now();
  RepOutcome out;
  out.reject.assign(cfg.alpha_levels.size(), 0);

  RngStream beta_stream = rep_master.substream(0);
  const Eigen::VectorXd beta = make_beta_star(s, cfg.p, beta_stream);
  RngStream seed_stream = rep_master.substream(1);
  const std::uint64_t dataset_seed = seed_stream.next_u64();
  const SimDataset sim =
      simulate_dataset(model_design(cfg.model, cfg.p), beta,
                       NoiseSpec::iid_gaussian(1.0), cfg.n, cfg.test_set,
                       dataset_seed);
  const Dataset data = sim.split();

  const int d = data.d();
  const double shift = h / std::sqrt(static_cast<double>(cfg.n));
  Eigen::VectorXd beta0(d);
  for (int k = 0; k < d; ++k) {
    beta0[k] = beta[cfg.test_set[static_cast<std::size_t>(k)] - 1] + shift;
  }

  RngStream tuning_stream = rep_master.substream(2);
  const TuningParams tuning =
      select_tuning(data, beta0, cfg.lambda, cfg.tuning_realizations,
                    tuning_stream);
  try {
    const GammaFit gamma_fit = fit_gamma(data, beta0, tuning);
    const ThetaFit theta_fit = fit_theta(data, tuning);
    out.violation = std::max(gamma_fit.max_violation, theta_fit.max_violation);
    const TestStatistic stat = compute_grip_statistic(gamma_fit, theta_fit);
    const Eigen::VectorXd draws =
        bootstrap_distribution(stat, cfg.scheme, cfg.B,
                               rep_master.substream(3));
    for (std::size_t a = 0; a < cfg.alpha_levels.size(); ++a) {
      out.reject[a] =
          quantile_and_decide(stat.t_max, draws, cfg.alpha_levels[a]).reject
              ? 1
              : 0;
    }
  } catch (const InfeasibleError&) {
    out.infeasible = true;
  }
  out.seconds = seconds_since(start);
  return out;
}

void append_cell_rows(const ExperimentConfig& cfg, int s, double h,
                      const std::vector<RepOutcome>& outcomes,
                      std::vector<SizePowerRow>& rows, RunDiagnostics* diag) {
  int infeasible = 0;
  double total_seconds = 0.0;
  double violation = -std::numeric_limits<double>::infinity();
  for (const RepOutcome& o : outcomes) {
    infeasible += o.infeasible ? 1 : 0;
    total_seconds += o.seconds;
    violation = std::max(violation, o.violation);
  }
  if (diag != nullptr) {
    diag->max_constraint_violation =
        std::max(diag->max_constraint_violation, violation);
  }
  const int denom = cfg.reps - infeasible;
  for (std::size_t a = 0; a < cfg.alpha_levels.size(); ++a) {
    int rejections = 0;
    for (const RepOutcome& o : outcomes) {
      rejections += o.reject[a];
    }
    SizePowerRow row;
    row.model = cfg.model;
    row.n = cfg.n;
    row.p = cfg.p;
    row.s = s;
    row.h = h;
    row.alpha = cfg.alpha_levels[a];
    row.reps = cfg.reps;
    row.rejection_rate =
        denom > 0 ? static_cast<double>(rejections) / denom : 0.0;
    row.infeasible_count = infeasible;
    row.mean_runtime_s = total_seconds / cfg.reps;
    row.rejections = rejections;
    rows.push_back(row);
  }
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const std::exception_ptr& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace

DesignSpec model_design(Model model, int p) {
  if (p < 1) {
    throw std::invalid_argument("design needs at least one column");
  }
  switch (model) {
    case Model::M1_Toeplitz:
      return DesignSpec{CovarianceSpec::toeplitz(0.4, p)};
    case Model::M2_Equicorrelation:
      return DesignSpec{CovarianceSpec::equicorrelation(0.2, p)};
    case Model::M3_StudentT:
      return DesignSpec{CovarianceSpec::equicorrelation(0.2, p),
                        EntryLaw::StudentT, 6, false};
  }
  throw std::invalid_argument("unknown model");
}

void ExperimentConfig::validate() const {
  if (n < 2) {
    throw std::invalid_argument("need at least two observations");
  }
  if (p < 2) {
    throw std::invalid_argument("need at least two design columns");
  }
  if (reps < 1) {
    throw std::invalid_argument("replication count must be positive");
  }
  if (B < 1) {
    throw std::invalid_argument("bootstrap draw count must be positive");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be positive");
  }
  if (tuning_realizations < 1) {
    throw std::invalid_argument("tuning realization count must be positive");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("tuning slack factor must lie in (0, 1)");
  }
  if (sparsity_grid.empty()) {
    throw std::invalid_argument("sparsity grid is empty");
  }
  for (int s : sparsity_grid) {
    check_sparsity(s, p);
  }
  if (h_grid.empty()) {
    throw std::invalid_argument("shift grid is empty");
  }
  check_levels(alpha_levels);
  if (test_set.empty()) {
    throw std::invalid_argument("tested set is empty");
  }
  std::vector<int> sorted = test_set;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 1 || sorted[k] > p) {
      throw std::invalid_argument("tested column index out of range");
    }
    if (k > 0 && sorted[k] == sorted[k - 1]) {
      throw std::invalid_argument("duplicate tested column index");
    }
  }
  if (static_cast<int>(test_set.size()) >= p) {
    throw std::invalid_argument("no control columns remain");
  }
  if (scheme.kind == MultiplierScheme::Kind::Block) {
    if (scheme.q <= scheme.r || scheme.r < 1) {
      throw std::invalid_argument(
          "block multipliers need big block q > small block r >= 1");
    }
    if (scheme.q + scheme.r > n) {
      throw std::invalid_argument("q + r exceeds n, no block fits");
    }
  }
}

std::vector<SizePowerRow> run_size_power(const ExperimentConfig& config,
                                         RunDiagnostics* diag) {
  config.validate();
  if (diag != nullptr) {
    *diag = RunDiagnostics{};
  }
  std::vector<SizePowerRow> rows;
  rows.reserve(config.sparsity_grid.size() * config.h_grid.size() *
               config.alpha_levels.size());
  RngStream root(config.seed);
  std::uint64_t cell = 0;
  for (int s : config.sparsity_grid) {
    for (double h : config.h_grid) {
      RngStream cell_stream = root.substream(cell++);
      std::vector<RepOutcome> outcomes(config.reps);
      std::vector<std::exception_ptr> errors(config.reps);
#pragma omp parallel for num_threads(config.threads) schedule(dynamic) \
    if (config.threads > 1)
      for (int rep = 0; rep < config.reps; ++rep) {
        try {
          outcomes[rep] = run_single_rep(config, s, h, cell_stream.substream(
                                                           static_cast<std::uint64_t>(rep)));
        } catch (...) {
          errors[rep] = std::current_exception();
        }
      }
      rethrow_first(errors);
      append_cell_rows(config, s, h, outcomes, rows, diag);
    }
  }
  return rows;
}

std::vector<SizePowerRow> run_size_power_serial(const ExperimentConfig& config,
                                                RunDiagnostics* diag) {
  config.validate();
  if (diag != nullptr) {
    *diag = RunDiagnostics{};
  }
  std::vector<SizePowerRow> rows;
  rows.reserve(config.sparsity_grid.size() * config.h_grid.size() *
               config.alpha_levels.size());
  RngStream root(config.seed);
  std::uint64_t cell = 0;
  for (int s : config.sparsity_grid) {
    for (double h : config.h_grid) {
      RngStream cell_stream = root.substream(cell++);
      std::vector<RepOutcome> outcomes(config.reps);
      for (int rep = 0; rep < config.reps; ++rep) {
        outcomes[rep] = run_single_rep(
            config, s, h, cell_stream.substream(static_cast<std::uint64_t>(rep)));
      }
      append_cell_rows(config, s, h, outcomes, rows, diag);
    }
  }
  return rows;
}

std::vector<Figure1Row> run_figure1(int n, int p,
                                    const std::vector<int>& sparsity_grid,
                                    int reps,
                                    const std::vector<double>& alpha_levels,
                                    std::uint64_t seed, int B, int threads) {
  if (n < 2) {
    throw std::invalid_argument("need at least two observations");
  }
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument(
        "column count must be even: the first half is tested");
  }
  if (reps < 1) {
    throw std::invalid_argument("replication count must be positive");
  }
  if (B < 1) {
    throw std::invalid_argument("bootstrap draw count must be positive");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be positive");
  }
  if (sparsity_grid.empty()) {
    throw std::invalid_argument("sparsity grid is empty");
  }
  const int d = p / 2;
  for (int s : sparsity_grid) {
    if (s < 0 || s > p - d) {
      throw std::invalid_argument(
          "sparsity must lie in [0, p/2], the number of control columns");
    }
  }
  check_levels(alpha_levels);

  const std::size_t n_alpha = alpha_levels.size();
  const DesignSpec design{CovarianceSpec::identity(p)};
  RngStream root(seed);
  std::vector<Figure1Row> rows;
  rows.reserve(sparsity_grid.size() * n_alpha);
  for (std::size_t si = 0; si < sparsity_grid.size(); ++si) {
    const int s = sparsity_grid[si];
    RngStream cell_stream = root.substream(si);
    std::vector<unsigned char> reject(static_cast<std::size_t>(reps) * n_alpha,
                                      0);
    std::vector<std::exception_ptr> errors(reps);
#pragma omp parallel for num_threads(threads) schedule(dynamic) \
    if (threads > 1)
    for (int rep = 0; rep < reps; ++rep) {
      try {
        RngStream rep_master =
            cell_stream.substream(static_cast<std::uint64_t>(rep));
        RngStream design_stream = rep_master.substream(0);
        const Eigen::MatrixXd w = sample_design(design, n, design_stream);
        RngStream noise_stream = rep_master.substream(1);
        Eigen::VectorXd y =
            sample_noise(NoiseSpec::iid_gaussian(1.0), n, noise_stream);
        if (s > 0) {
          y += w.middleCols(d, s).rowwise().sum() /
               std::sqrt(static_cast<double>(n));
        }
        const ClosedFormStatistic stat = zc_closed_form_statistic(w, y, d);
        RngStream boot_stream = rep_master.substream(2);
        Eigen::MatrixXd xi(n, B);
        for (int b = 0; b < B; ++b) {
          RngStream draw_stream =
              boot_stream.substream(static_cast<std::uint64_t>(b));
          for (int i = 0; i < n; ++i) {
            xi(i, b) = draw_stream.normal();
          }
        }
        const Eigen::MatrixXd sums = w.leftCols(d).transpose() * xi;
        Eigen::VectorXd draws(B);
        for (int b = 0; b < B; ++b) {
          draws[b] =
              stat.diag_weights.cwiseProduct(sums.col(b)).cwiseAbs().maxCoeff() /
              n;
        }
        for (std::size_t a = 0; a < n_alpha; ++a) {
          reject[static_cast<std::size_t>(rep) * n_alpha + a] =
              quantile_and_decide(stat.statistic, draws, alpha_levels[a]).reject
                  ? 1
                  : 0;
        }
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
    rethrow_first(errors);
    for (std::size_t a = 0; a < n_alpha; ++a) {
      int count = 0;
      for (int rep = 0; rep < reps; ++rep) {
        count += reject[static_cast<std::size_t>(rep) * n_alpha + a];
      }
      rows.push_back(Figure1Row{s, alpha_levels[a],
                                static_cast<double>(count) / reps, reps});
    }
  }
  return rows;
}

std::vector<GlobalNullRow> run_global_null(
    int n, int p, int reps, int B, const std::vector<double>& alpha_levels,
    std::uint64_t seed, int threads) {
  if (n < 2) {
    throw std::invalid_argument("need at least two observations");
  }
  if (p < 1) {
    throw std::invalid_argument("need at least one design column");
  }
  if (reps < 1) {
    throw std::invalid_argument("replication count must be positive");
  }
  if (B < 1) {
    throw std::invalid_argument("bootstrap draw count must be positive");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be positive");
  }
  check_levels(alpha_levels);

  const std::size_t n_alpha = alpha_levels.size();
  const DesignSpec design{CovarianceSpec::identity(p)};
  const Eigen::VectorXd delta0 = Eigen::VectorXd::Zero(p);
  RngStream root(seed);
  std::vector<unsigned char> reject(static_cast<std::size_t>(reps) * n_alpha,
                                    0);
  std::vector<std::exception_ptr> errors(reps);
#pragma omp parallel for num_threads(threads) schedule(dynamic) \
    if (threads > 1)
  for (int rep = 0; rep < reps; ++rep) {
    try {
      RngStream rep_master = root.substream(static_cast<std::uint64_t>(rep));
      RngStream design_stream = rep_master.substream(0);
      const Eigen::MatrixXd w = sample_design(design, n, design_stream);
      RngStream noise_stream = rep_master.substream(1);
      const Eigen::VectorXd y =
          sample_noise(NoiseSpec::iid_gaussian(1.0), n, noise_stream);
      const TestStatistic stat = compute_global_statistic(w, y, delta0);
      const Eigen::VectorXd draws = bootstrap_distribution(
          stat, MultiplierScheme::iid(), B, rep_master.substream(2));
      for (std::size_t a = 0; a < n_alpha; ++a) {
        reject[static_cast<std::size_t>(rep) * n_alpha + a] =
            quantile_and_decide(stat.t_max, draws, alpha_levels[a]).reject ? 1
                                                                           : 0;
      }
    } catch (...) {
      errors[rep] = std::current_exception();
    }
  }
  rethrow_first(errors);
  std::vector<GlobalNullRow> rows;
  rows.reserve(n_alpha);
  for (std::size_t a = 0; a < n_alpha; ++a) {
    int count = 0;
    for (int rep = 0; rep < reps; ++rep) {
      count += reject[static_cast<std::size_t>(rep) * n_alpha + a];
    }
    rows.push_back(GlobalNullRow{alpha_levels[a],
                                 static_cast<double>(count) / reps, reps});
  }
  return rows;
}

GammaFeasibility check_gamma_feasibility(const Dataset& data,
                                         const Eigen::VectorXd& beta0,
                                         const Eigen::VectorXd& gamma,
                                         const TuningParams& tuning) {
  if (data.n() < 1 || data.n_controls() < 1) {
    throw std::invalid_argument("dataset has no observations or no controls");
  }
  if (beta0.size() != data.d()) {
    throw std::invalid_argument("beta0 length does not match tested columns");
  }
  if (gamma.size() != data.n_controls()) {
    throw std::invalid_argument("gamma length does not match control columns");
  }
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd g = data.y - data.z * beta0;
  const Eigen::VectorXd resid = g - data.x * gamma;
  GammaFeasibility out;
  out.gradient_bound =
      (data.x.transpose() * resid / n).cwiseAbs().maxCoeff() <=
      tuning.eta_gamma;
  out.inner_product = g.dot(resid) / n >= tuning.etabar_gamma;
  out.residual_bound = resid.cwiseAbs().maxCoeff() <= tuning.mu_gamma;
  return out;
}

FeasibilityRates run_feasibility_study(Model model, int n, int p, int s,
                                       int reps, std::uint64_t seed,
                                       double lambda, int tuning_realizations,
                                       int threads) {
  const std::vector<int> test_set = {4, 5, 7, 8, 10, 11};
  if (n < 2) {
    throw std::invalid_argument("need at least two observations");
  }
  if (p < 11) {
    throw std::invalid_argument(
        "need at least 11 columns to hold the default tested set");
  }
  check_sparsity(s, p);
  if (reps < 1) {
    throw std::invalid_argument("replication count must be positive");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("tuning slack factor must lie in (0, 1)");
  }
  if (tuning_realizations < 1) {
    throw std::invalid_argument("tuning realization count must be positive");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be positive");
  }

  std::vector<char> tested(p + 1, 0);
  for (int j : test_set) {
    tested[j] = 1;
  }
  const DesignSpec design = model_design(model, p);
  RngStream root(seed);
  std::vector<unsigned char> flags(static_cast<std::size_t>(reps) * 4, 0);
  std::vector<std::exception_ptr> errors(reps);
#pragma omp parallel for num_threads(threads) schedule(dynamic) \
    if (threads > 1)
  for (int rep = 0; rep < reps; ++rep) {
    try {
      RngStream rep_master = root.substream(static_cast<std::uint64_t>(rep));
      RngStream beta_stream = rep_master.substream(0);
      const Eigen::VectorXd beta = make_beta_star(s, p, beta_stream);
      RngStream seed_stream = rep_master.substream(1);
      const std::uint64_t dataset_seed = seed_stream.next_u64();
      const SimDataset sim =
          simulate_dataset(design, beta, NoiseSpec::iid_gaussian(1.0), n,
                           test_set, dataset_seed);
      const Dataset data = sim.split();
      Eigen::VectorXd beta0(static_cast<int>(test_set.size()));
      for (std::size_t k = 0; k < test_set.size(); ++k) {
        beta0[static_cast<int>(k)] = beta[test_set[k] - 1];
      }
      Eigen::VectorXd gamma_star(p - static_cast<int>(test_set.size()));
      int idx = 0;
      for (int j = 1; j <= p; ++j) {
        if (!tested[j]) {
          gamma_star[idx++] = beta[j - 1];
        }
      }
      RngStream tuning_stream = rep_master.substream(2);
      const TuningParams tuning =
          select_tuning(data, beta0, lambda, tuning_realizations,
                        tuning_stream);
      const GammaFeasibility f =
          check_gamma_feasibility(data, beta0, gamma_star, tuning);
      const std::size_t base = static_cast<std::size_t>(rep) * 4;
      flags[base + 0] = f.all() ? 1 : 0;
      flags[base + 1] = f.gradient_bound ? 1 : 0;
      flags[base + 2] = f.inner_product ? 1 : 0;
      flags[base + 3] = f.residual_bound ? 1 : 0;
    } catch (...) {
      errors[rep] = std::current_exception();
    }
  }
  rethrow_first(errors);
  int counts[4] = {0, 0, 0, 0};
  for (int rep = 0; rep < reps; ++rep) {
    for (int k = 0; k < 4; ++k) {
      counts[k] += flags[static_cast<std::size_t>(rep) * 4 + k];
    }
  }
  FeasibilityRates rates;
  rates.reps = reps;
  rates.all_constraints = static_cast<double>(counts[0]) / reps;
  rates.gradient_bound = static_cast<double>(counts[1]) / reps;
  rates.inner_product = static_cast<double>(counts[2]) / reps;
  rates.residual_bound = static_cast<double>(counts[3]) / reps;
  return rates;
}

}  // namespace grip
