#pragma once

#include <Eigen/Dense>
#include <vector>

#include "grip/dataset.hpp"
#include "grip/lp.hpp"
#include "grip/rng.hpp"

namespace grip {

// Constraint levels for the two l1 programs. The control-coefficient program
// uses the gamma scalars; the projection program for tested column j uses
// entry j of the theta vectors.
struct TuningParams {
  double eta_gamma = 0.0;
  double etabar_gamma = 0.0;
  double mu_gamma = 0.0;
  Eigen::VectorXd eta_theta;
  Eigen::VectorXd etabar_theta;
  Eigen::VectorXd mu_theta;
  double lambda_gamma = 0.95;

  // Throws std::invalid_argument unless the eta levels are nonnegative, the
  // etabar and mu levels strictly positive, the theta vectors have length d,
  // and lambda_gamma lies in (0,1).
  void validate(int d) const;
};

// Fitting knobs shared by both programs. With auto_relax set, an infeasible
// program is retried with eta and mu inflated by relax_factor, at most
// max_relax_rounds times; etabar is never relaxed. threads > 1 solves the
// projection columns concurrently (results are identical either way).
struct FitOptions {
  double feas_tol = 1e-7;
  bool auto_relax = false;
  int max_relax_rounds = 3;
  double relax_factor = 1.5;
  int threads = 1;
};

struct GammaFit {
  Eigen::VectorXd gamma_hat;   // length n_controls
  Eigen::VectorXd residuals;   // y - z beta0 - x gamma_hat
  double sigma_eps_hat = 0.0;  // sqrt of the mean squared residual
  double objective = 0.0;      // l1 norm of gamma_hat
  int relax_rounds = 0;
  double max_violation = 0.0;  // signed worst constraint residual
};

struct ThetaFit {
  Eigen::MatrixXd theta_hat;    // n_controls x d
  Eigen::MatrixXd u_hat;        // n x d, column j = z_(j) - x theta_hat_(j)
  Eigen::VectorXd sigma_u_hat;  // length d
  Eigen::VectorXd objectives;   // per-column l1 norms
  std::vector<int> relax_rounds;
  double max_violation = 0.0;  // worst over all columns
};

// Data-driven constraint levels: eta_gamma and every eta_theta entry are the
// empirical maximum of ||X^T xi / n||_inf over `realizations` standard normal
// draws xi (n variates each, observation order); mu levels are the maximum of
// ||xi||_inf over the same draws. The etabar floors keep a (1 - lambda) share
// of the relevant mean square: etabar_gamma = (1-lambda) G^T G / n with
// G = y - Z beta0, and etabar_theta[j] = (1-lambda) Z_(j)^T Z_(j) / n.
// Throws std::invalid_argument for lambda outside (0,1), realizations < 1,
// a degenerate residual (G = 0), or a zero-norm tested column.
TuningParams select_tuning(const Dataset& data, const Eigen::VectorXd& beta0,
                           double lambda, int realizations, RngStream& stream);

// Minimum-l1 control coefficients subject to the three constraint families
// at the gamma levels, with g = y - Z beta0 against the control design X.
// Infeasibility is rethrown with a remedy hint after any relax rounds are
// exhausted.
GammaFit fit_gamma(const Dataset& data, const Eigen::VectorXd& beta0,
                   const TuningParams& tuning, const FitOptions& options = {});

// Per-column minimum-l1 projections of each tested column on the controls,
// at the theta levels. Column j failures are reported with the 1-based
// column index.
ThetaFit fit_theta(const Dataset& data, const TuningParams& tuning,
                   const FitOptions& options = {});

}  // namespace grip
