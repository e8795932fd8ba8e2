#pragma once

#include <Eigen/Dense>

#include "grip/estimators.hpp"

namespace grip {

// Studentized moment rows with their scaled column sums: t_n[j] is n^{-1/2}
// times the j-th column sum of rows, and t_max is the sup-norm of t_n.
struct TestStatistic {
  Eigen::MatrixXd rows;  // n x d
  Eigen::VectorXd t_n;   // length d
  double t_max = 0.0;
};

// rows[i][j] = u_hat(i,j) * residual_i / (sigma_u_hat[j] * sigma_eps_hat).
// Throws std::invalid_argument when the fits disagree on n, or when any
// studentizer is zero (degenerate fit).
TestStatistic compute_grip_statistic(const GammaFit& gamma_fit,
                                     const ThetaFit& theta_fit);

// Marginal-correlation statistic for a global null on the full design:
// rows[i][j] = n * w(i,j) * r_i / (||r||_2 * ||W_(j)||_2) with r = y - W delta0.
// Throws std::invalid_argument on an exact fit (r = 0) or a zero-norm column.
TestStatistic compute_global_statistic(const Eigen::MatrixXd& w,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& delta0);

struct ClosedFormStatistic {
  double statistic = 0.0;
  Eigen::VectorXd diag_weights;  // 1 / sigma2_j, length d
};

// Closed-form sup statistic over the first d columns of w:
// max_{j<=d} |Z_(j)^T y| / (n * sigma2_j) with sigma2_j = ||W_(j)||^2 / n.
ClosedFormStatistic zc_closed_form_statistic(const Eigen::MatrixXd& w,
                                             const Eigen::VectorXd& y, int d);

}  // namespace grip
