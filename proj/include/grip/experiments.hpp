#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "grip/bootstrap.hpp"
#include "grip/estimators.hpp"
#include "grip/statistic.hpp"
#include "grip/synthdata.hpp"

namespace grip {

enum class Model { M1_Toeplitz = 1, M2_Equicorrelation = 2, M3_StudentT = 3 };

// Design recipe per model: Toeplitz(0.4) Gaussian rows, equicorrelation(0.2)
// Gaussian rows, or equicorrelation(0.2) rows built from t(6) entries.
DesignSpec model_design(Model model, int p);

struct ExperimentConfig {
  Model model = Model::M1_Toeplitz;
  int n = 200;
  int p = 500;
  std::vector<int> sparsity_grid;
  std::vector<double> h_grid;  // beta0 = beta* + h/sqrt(n) on the tested set
  std::vector<int> test_set = {4, 5, 7, 8, 10, 11};  // 1-based columns
  std::vector<double> alpha_levels = {0.05};
  int reps = 100;
  int B = 500;
  std::uint64_t seed = 0;
  MultiplierScheme scheme = MultiplierScheme::iid();
  double lambda = 0.95;
  int tuning_realizations = 30;
  int threads = 1;

  void validate() const;  // throws std::invalid_argument
};

struct SizePowerRow {
  Model model = Model::M1_Toeplitz;
  int n = 0;
  int p = 0;
  int s = 0;
  double h = 0.0;
  double alpha = 0.0;
  int reps = 0;
  double rejection_rate = 0.0;  // rejections / (reps - infeasible_count)
  int infeasible_count = 0;
  double mean_runtime_s = 0.0;
  int rejections = 0;  // raw count behind the rate
};

struct RunDiagnostics {
  // Worst signed constraint residual over every fit in the run.
  double max_constraint_violation = -std::numeric_limits<double>::infinity();
};

// One full testing pipeline per replication: sample the model, impose
// beta0 = beta*_J + h/sqrt(n), select tuning, fit both programs, bootstrap,
// decide at each level. Replications run under OpenMP with one substream
// per (cell, rep), so any thread count gives identical rows. Replications
// whose programs stay infeasible are excluded from the rate denominator.
std::vector<SizePowerRow> run_size_power(const ExperimentConfig& config,
                                         RunDiagnostics* diag = nullptr);

// Plain single-loop twin of run_size_power, kept as the reference the
// parallel path is checked against.
std::vector<SizePowerRow> run_size_power_serial(const ExperimentConfig& config,
                                                RunDiagnostics* diag = nullptr);

struct Figure1Row {
  int s = 0;
  double alpha = 0.0;
  double rejection_rate = 0.0;
  int reps = 0;
};

// Rejection curve of the closed-form marginal test on an identity-covariance
// design with the first p/2 columns tested under a true null and s dense
// control coefficients of size n^{-1/2}. Each replication draws fresh
// critical values from B multiplier draws.
std::vector<Figure1Row> run_figure1(int n, int p,
                                    const std::vector<int>& sparsity_grid,
                                    int reps,
                                    const std::vector<double>& alpha_levels,
                                    std::uint64_t seed, int B = 500,
                                    int threads = 1);

struct GlobalNullRow {
  double alpha = 0.0;
  double rejection_rate = 0.0;
  int reps = 0;
};

// Size of the global-null marginal-correlation test on an identity-covariance
// Gaussian design with delta* = delta0 = 0.
std::vector<GlobalNullRow> run_global_null(
    int n, int p, int reps, int B, const std::vector<double>& alpha_levels,
    std::uint64_t seed, int threads = 1);

struct GammaFeasibility {
  bool gradient_bound = false;
  bool inner_product = false;
  bool residual_bound = false;
  bool all() const { return gradient_bound && inner_product && residual_bound; }
};

// Evaluates the three constraint families at a candidate control coefficient
// vector (non-strict inequalities, no tolerance).
GammaFeasibility check_gamma_feasibility(const Dataset& data,
                                         const Eigen::VectorXd& beta0,
                                         const Eigen::VectorXd& gamma,
                                         const TuningParams& tuning);

struct FeasibilityRates {
  int reps = 0;
  double all_constraints = 0.0;
  double gradient_bound = 0.0;
  double inner_product = 0.0;
  double residual_bound = 0.0;
};

// Fraction of replications in which the true control coefficients satisfy
// the gamma program under data-driven tuning, with the null imposed exactly
// (beta0 = beta*_J, h = 0) on the default tested set {4,5,7,8,10,11}.
FeasibilityRates run_feasibility_study(Model model, int n, int p, int s,
                                       int reps, std::uint64_t seed,
                                       double lambda = 0.95,
                                       int tuning_realizations = 30,
                                       int threads = 1);

}  // namespace grip
