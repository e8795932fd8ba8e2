#include "grip/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

namespace grip {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_positive_level(double value, const char* name, bool allow_zero) {
  if (std::isnan(value) || value < 0.0 || (!allow_zero && value == 0.0))
    throw std::invalid_argument(std::string(name) + " must be " +
                                (allow_zero ? "nonnegative" : "positive"));
}

// Runs one program with the relax policy; `label` prefixes error messages.
LpSolution solve_with_relax(const L1ConstrainedLp& kernel, const VectorXd& g,
                            double eta, double etabar, double mu,
                            const FitOptions& options, int* rounds_out,
                            const std::string& label) {
  int rounds = 0;
  for (;;) {
    try {
      LpSolution sol = kernel.solve(g, eta, etabar, mu, options.feas_tol);
      if (rounds_out) *rounds_out = rounds;
      return sol;
    } catch (const InfeasibleError& err) {
      if (!options.auto_relax || rounds >= options.max_relax_rounds)
        throw InfeasibleError(err.family(), label + err.what());
      ++rounds;
      eta *= options.relax_factor;
      mu *= options.relax_factor;
    }
  }
}

}  // namespace

void TuningParams::validate(int d) const {
  check_positive_level(eta_gamma, "eta_gamma", true);
  check_positive_level(etabar_gamma, "etabar_gamma", false);
  check_positive_level(mu_gamma, "mu_gamma", false);
  if (!(lambda_gamma > 0.0 && lambda_gamma < 1.0))
    throw std::invalid_argument("lambda_gamma must be in (0,1)");
  if (eta_theta.size() != d || etabar_theta.size() != d ||
      mu_theta.size() != d)
    throw std::invalid_argument(
        "theta tuning vectors must have one entry per tested column");
  for (int j = 0; j < d; ++j) {
    check_positive_level(eta_theta[j], "eta_theta", true);
    check_positive_level(etabar_theta[j], "etabar_theta", false);
    check_positive_level(mu_theta[j], "mu_theta", false);
  }
}

TuningParams select_tuning(const Dataset& data, const Eigen::VectorXd& beta0,
                           double lambda, int realizations,
                           RngStream& stream) {
  const int n = data.n();
  const int d = data.d();
  if (d < 1 || data.n_controls() < 1 || n < 1)
    throw std::invalid_argument("select_tuning: dataset must be nonempty");
  if (beta0.size() != d)
    throw std::invalid_argument(
        "select_tuning: beta0 length must match the tested column count");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("select_tuning: lambda_gamma must be in (0,1)");
  if (realizations < 1)
    throw std::invalid_argument("select_tuning: realizations must be >= 1");

  const VectorXd g = data.y - data.z * beta0;
  const double g_ms = g.squaredNorm() / n;
  if (g_ms == 0.0)
    throw std::invalid_argument(
        "select_tuning: degenerate residual (y - Z beta0 is zero, no "
        "etabar_gamma level exists)");

  double eta = 0.0;
  double mu = 0.0;
  VectorXd xi(n);
  for (int r = 0; r < realizations; ++r) {
    for (int i = 0; i < n; ++i) xi[i] = stream.normal();
    eta = std::max(eta,
                   (data.x.transpose() * xi / n).lpNorm<Eigen::Infinity>());
    mu = std::max(mu, xi.lpNorm<Eigen::Infinity>());
  }

  TuningParams out;
  out.eta_gamma = eta;
  out.etabar_gamma = (1.0 - lambda) * g_ms;
  out.mu_gamma = mu;
  out.lambda_gamma = lambda;
  out.eta_theta = VectorXd::Constant(d, eta);
  out.mu_theta = VectorXd::Constant(d, mu);
  out.etabar_theta.resize(d);
  for (int j = 0; j < d; ++j) {
    const double col_ms = data.z.col(j).squaredNorm() / n;
    if (col_ms == 0.0)
      throw std::invalid_argument("select_tuning: tested column " +
                                  std::to_string(j + 1) +
                                  " has zero norm (degenerate)");
    out.etabar_theta[j] = (1.0 - lambda) * col_ms;
  }
  out.validate(d);
  return out;
}

GammaFit fit_gamma(const Dataset& data, const Eigen::VectorXd& beta0,
                   const TuningParams& tuning, const FitOptions& options) {
  const int n = data.n();
  const int d = data.d();
  if (d < 1 || data.n_controls() < 1)
    throw std::invalid_argument("fit_gamma: dataset must be nonempty");
  if (beta0.size() != d)
    throw std::invalid_argument(
        "fit_gamma: beta0 length must match the tested column count");
  tuning.validate(d);

  const VectorXd g = data.y - data.z * beta0;
  L1ConstrainedLp kernel(data.x);
  GammaFit fit;
  LpSolution sol = solve_with_relax(
      kernel, g, tuning.eta_gamma, tuning.etabar_gamma, tuning.mu_gamma,
      options, &fit.relax_rounds,
      "gamma-LP infeasible: consider larger eta_gamma/mu_gamma or smaller "
      "etabar_gamma: ");
  fit.gamma_hat = std::move(sol.xi);
  fit.residuals = g - data.x * fit.gamma_hat;
  fit.sigma_eps_hat = std::sqrt(fit.residuals.squaredNorm() / n);
  fit.objective = sol.objective;
  fit.max_violation = sol.max_violation;
  return fit;
}

ThetaFit fit_theta(const Dataset& data, const TuningParams& tuning,
                   const FitOptions& options) {
  const int n = data.n();
  const int d = data.d();
  const int m = data.n_controls();
  if (d < 1 || m < 1)
    throw std::invalid_argument("fit_theta: dataset must be nonempty");
  tuning.validate(d);

  L1ConstrainedLp kernel(data.x);
  ThetaFit fit;
  fit.theta_hat.resize(m, d);
  fit.u_hat.resize(n, d);
  fit.sigma_u_hat.resize(d);
  fit.objectives.resize(d);
  fit.relax_rounds.assign(d, 0);
  VectorXd violations(d);
  std::vector<std::exception_ptr> errors(d);

  const int threads = std::max(1, options.threads);
#pragma omp parallel for num_threads(threads) schedule(dynamic) \
    if (threads > 1)
  for (int j = 0; j < d; ++j) {
    try {
      LpSolution sol = solve_with_relax(
          kernel, data.z.col(j), tuning.eta_theta[j], tuning.etabar_theta[j],
          tuning.mu_theta[j], options, &fit.relax_rounds[j],
          "theta-LP infeasible for tested column " + std::to_string(j + 1) +
              ": ");
      fit.theta_hat.col(j) = sol.xi;
      fit.u_hat.col(j) = data.z.col(j) - data.x * sol.xi;
      fit.sigma_u_hat[j] = std::sqrt(fit.u_hat.col(j).squaredNorm() / n);
      fit.objectives[j] = sol.objective;
      violations[j] = sol.max_violation;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (int j = 0; j < d; ++j)
    if (errors[j]) std::rethrow_exception(errors[j]);

  fit.max_violation = violations.maxCoeff();
  return fit;
}

}  // namespace grip
