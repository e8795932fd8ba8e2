#include "grip/statistic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace grip {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TestStatistic compute_grip_statistic(const GammaFit& gamma_fit,
                                     const ThetaFit& theta_fit) {
  const int n = static_cast<int>(gamma_fit.residuals.size());
  const int d = static_cast<int>(theta_fit.u_hat.cols());
  if (n < 1 || d < 1 || theta_fit.u_hat.rows() != n)
    throw std::invalid_argument(
        "compute_grip_statistic: fits disagree on the sample size");
  if (theta_fit.sigma_u_hat.size() != d)
    throw std::invalid_argument(
        "compute_grip_statistic: sigma_u_hat length must match u_hat columns");
  if (gamma_fit.sigma_eps_hat <= 0.0)
    throw std::invalid_argument(
        "compute_grip_statistic: degenerate fit, sigma_eps_hat is zero "
        "(cannot studentize)");
  for (int j = 0; j < d; ++j)
    if (theta_fit.sigma_u_hat[j] <= 0.0)
      throw std::invalid_argument(
          "compute_grip_statistic: degenerate fit, sigma_u_hat is zero for "
          "tested column " +
          std::to_string(j + 1) + " (cannot studentize)");

  TestStatistic stat;
  stat.rows = theta_fit.u_hat.array().colwise() *
              gamma_fit.residuals.array();
  stat.rows.array().rowwise() /=
      (theta_fit.sigma_u_hat.transpose().array() * gamma_fit.sigma_eps_hat);
  stat.t_n = stat.rows.colwise().sum() / std::sqrt(static_cast<double>(n));
  stat.t_max = stat.t_n.lpNorm<Eigen::Infinity>();
  return stat;
}

TestStatistic compute_global_statistic(const Eigen::MatrixXd& w,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& delta0) {
  const int n = static_cast<int>(w.rows());
  const int p = static_cast<int>(w.cols());
  if (n < 1 || p < 1)
    throw std::invalid_argument("compute_global_statistic: empty design");
  if (y.size() != n || delta0.size() != p)
    throw std::invalid_argument(
        "compute_global_statistic: shape mismatch between w, y, delta0");

  const VectorXd resid = y - w * delta0;
  const double resid_norm = resid.norm();
  if (resid_norm == 0.0)
    throw std::invalid_argument(
        "compute_global_statistic: degenerate residual (y equals W delta0 "
        "exactly)");

  TestStatistic stat;
  stat.rows.resize(n, p);
  stat.t_n.resize(p);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int j = 0; j < p; ++j) {
    const double col_norm = w.col(j).norm();
    if (col_norm == 0.0)
      throw std::invalid_argument(
          "compute_global_statistic: column " + std::to_string(j + 1) +
          " has zero norm (degenerate)");
    const double denom = resid_norm * col_norm;
    stat.rows.col(j) = n * w.col(j).cwiseProduct(resid) / denom;
    stat.t_n[j] = root_n * w.col(j).dot(resid) / denom;
  }
  stat.t_max = stat.t_n.lpNorm<Eigen::Infinity>();
  return stat;
}

ClosedFormStatistic zc_closed_form_statistic(const Eigen::MatrixXd& w,
                                             const Eigen::VectorXd& y, int d) {
  const int n = static_cast<int>(w.rows());
  const int p = static_cast<int>(w.cols());
  if (n < 1 || d < 1 || d > p)
    throw std::invalid_argument(
        "zc_closed_form_statistic: need 1 <= d <= cols(w)");
  if (y.size() != n)
    throw std::invalid_argument(
        "zc_closed_form_statistic: y length must match rows of w");

  ClosedFormStatistic out;
  out.diag_weights.resize(d);
  for (int j = 0; j < d; ++j) {
    const double sigma2 = w.col(j).squaredNorm() / n;
    if (sigma2 == 0.0)
      throw std::invalid_argument("zc_closed_form_statistic: column " +
                                  std::to_string(j + 1) +
                                  " has zero norm (degenerate)");
    out.diag_weights[j] = 1.0 / sigma2;
    const double value = std::abs(w.col(j).dot(y) / n) * out.diag_weights[j];
    out.statistic = std::max(out.statistic, value);
  }
  return out;
}

}  // namespace grip
