#include <chrono>
#include <cstdio>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "grip/bootstrap.hpp"
#include "grip/dataset.hpp"
#include "grip/estimators.hpp"
#include "grip/experiments.hpp"
#include "grip/lp.hpp"
#include "grip/rng.hpp"
#include "grip/statistic.hpp"
#include "grip/synthdata.hpp"

namespace {

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

template <typename F>
double timed(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return seconds(start);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 100;
  int p = 200;
  int reps = 20;
  int bootstrap = 200;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  std::uint64_t seed = 1;

  CLI::App app{"Wall-clock comparison of the parallel and serial study runners"};
  app.add_option("--n", n, "Observations")->capture_default_str();
  app.add_option("--p", p, "Design columns")->capture_default_str();
  app.add_option("--reps", reps, "Replications per cell")->capture_default_str();
  app.add_option("--bootstrap", bootstrap, "Multiplier draws")->capture_default_str();
  app.add_option("--threads", threads, "Threads for the parallel runner")
      ->capture_default_str();
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (threads < 1) threads = 1;

  grip::ExperimentConfig cfg;
  cfg.model = grip::Model::M1_Toeplitz;
  cfg.n = n;
  cfg.p = p;
  cfg.sparsity_grid = {2};
  cfg.h_grid = {0.0, 2.0};
  cfg.alpha_levels = {0.05};
  cfg.reps = reps;
  cfg.B = bootstrap;
  cfg.seed = seed;

  std::printf("size/power study: model 1, n=%d, p=%d, %d reps x %zu cells, B=%d\n",
              n, p, reps, cfg.h_grid.size() * cfg.sparsity_grid.size(), bootstrap);

  std::vector<grip::SizePowerRow> serial_rows, parallel_rows;
  const double t_serial =
      timed([&] { serial_rows = grip::run_size_power_serial(cfg); });
  cfg.threads = threads;
  const double t_parallel =
      timed([&] { parallel_rows = grip::run_size_power(cfg); });

  bool identical = serial_rows.size() == parallel_rows.size();
  for (std::size_t i = 0; identical && i < serial_rows.size(); ++i)
    identical = serial_rows[i].rejections == parallel_rows[i].rejections &&
                serial_rows[i].infeasible_count ==
                    parallel_rows[i].infeasible_count;

  std::printf("  serial reference   %8.3f s\n", t_serial);
  std::printf("  OpenMP x%-2d         %8.3f s   speedup %.2fx   rows %s\n",
              threads, t_parallel, t_serial / t_parallel,
              identical ? "identical" : "DIFFER");

  grip::RngStream stream(seed);
  grip::RngStream beta_stream = stream.substream(0);
  const Eigen::VectorXd beta = grip::make_beta_star(2, p, beta_stream);
  const grip::DesignSpec design = grip::model_design(grip::Model::M1_Toeplitz, p);
  const std::vector<int> tested = {4, 5, 7, 8, 10, 11};
  const grip::SimDataset sim =
      grip::simulate_dataset(design, beta, grip::NoiseSpec::iid_gaussian(1.0), n,
                             tested, stream.substream(1).next_u64());
  const grip::Dataset data = sim.split();
  Eigen::VectorXd beta0(6);
  for (int k = 0; k < 6; ++k) beta0[k] = beta[tested[k] - 1];
  grip::RngStream tune_stream = stream.substream(2);
  const grip::TuningParams tuning =
      grip::select_tuning(data, beta0, 0.95, 30, tune_stream);

  grip::GammaFit gamma_fit;
  const double t_gamma = timed([&] { gamma_fit = grip::fit_gamma(data, beta0, tuning); });
  grip::FitOptions theta_options;
  theta_options.threads = threads;
  grip::ThetaFit theta_fit;
  const double t_theta =
      timed([&] { theta_fit = grip::fit_theta(data, tuning, theta_options); });
  std::printf("constrained LP fits at n=%d, %d controls:\n", n, data.n_controls());
  std::printf("  nuisance program   %8.3f s\n", t_gamma);
  std::printf("  6 projections      %8.3f s   (%d threads)\n", t_theta, threads);

  const grip::TestStatistic stat =
      grip::compute_grip_statistic(gamma_fit, theta_fit);
  const int big_b = 2000;
  Eigen::VectorXd draws;
  const double t_boot = timed([&] {
    draws = grip::bootstrap_distribution(stat, grip::MultiplierScheme::iid(),
                                         big_b, stream.substream(3));
  });
  std::printf("multiplier bootstrap: %d draws on %dx%d rows in %.3f s (%.0f draws/s)\n",
              big_b, n, 6, t_boot, big_b / t_boot);
  return draws.size() == big_b ? 0 : 1;
}
