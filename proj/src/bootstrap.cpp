#include "grip/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace grip {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MultiplierScheme MultiplierScheme::block_defaults(int n) {
  if (n < 1) throw std::invalid_argument("block_defaults: n must be >= 1");
  const int q = static_cast<int>(std::ceil(std::pow(n, 2.0 / 3.0) - 1e-9));
  const int r = static_cast<int>(std::ceil(std::cbrt(double(n)) - 1e-9));
  return block(q, r);
}

Eigen::VectorXd draw_block_multipliers(int n, int q, int r,
                                       RngStream& stream) {
  if (n < 1) throw std::invalid_argument("block multipliers: n must be >= 1");
  if (r < 1 || q <= r)
    throw std::invalid_argument(
        "block multipliers: need big block q > small block r >= 1");
  const int m = n / (q + r);
  if (m < 1)
    throw std::invalid_argument(
        "block multipliers: q + r exceeds n, no block fits");

  VectorXd xi = VectorXd::Zero(n);
  for (int k = 0; k < m; ++k) {
    const double value = stream.normal();
    xi.segment(static_cast<Eigen::Index>(q + r) * k, q).setConstant(value);
  }
  return xi;
}

Eigen::VectorXd bootstrap_distribution(const TestStatistic& stat,
                                       const MultiplierScheme& scheme, int B,
                                       RngStream stream) {
  const int n = static_cast<int>(stat.rows.rows());
  const int d = static_cast<int>(stat.rows.cols());
  if (n < 1 || d < 1)
    throw std::invalid_argument("bootstrap_distribution: empty statistic rows");
  if (B < 1)
    throw std::invalid_argument("bootstrap_distribution: B must be >= 1");

  MatrixXd centered = stat.rows.rowwise() - stat.rows.colwise().mean();

  MatrixXd xi(n, B);
  for (int b = 0; b < B; ++b) {
    RngStream sub = stream.substream(static_cast<std::uint64_t>(b));
    if (scheme.kind == MultiplierScheme::Kind::IidGaussian) {
      for (int i = 0; i < n; ++i) xi(i, b) = sub.normal();
    } else {
      xi.col(b) = draw_block_multipliers(n, scheme.q, scheme.r, sub);
    }
  }

  const MatrixXd sums = centered.transpose() * xi;  // d x B
  const double root_n = std::sqrt(static_cast<double>(n));
  VectorXd draws(B);
  for (int b = 0; b < B; ++b)
    draws[b] = sums.col(b).cwiseAbs().maxCoeff() / root_n;
  return draws;
}

BootstrapResult quantile_and_decide(double t_max, const Eigen::VectorXd& draws,
                                    double alpha) {
  const int B = static_cast<int>(draws.size());
  if (B < 1)
    throw std::invalid_argument("quantile_and_decide: draws must be nonempty");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("quantile_and_decide: alpha must be in (0,1)");
  if (B < static_cast<int>(std::ceil(1.0 / alpha)))
    std::cerr << "warning: " << B << " bootstrap draws resolve level alpha="
              << alpha << " coarsely; use at least " << std::ceil(1.0 / alpha)
              << "\n";

  VectorXd sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  // Guard the rank against cases like B(1-alpha) = 450 computing as
  // 450.0000000000001 and rounding the rank up a slot.
  int rank = static_cast<int>(std::ceil(B * (1.0 - alpha) - 1e-9));
  rank = std::clamp(rank, 1, B);

  BootstrapResult out;
  out.draws = draws;
  out.quantile = sorted[rank - 1];
  out.p_value = (1.0 + (draws.array() >= t_max).count()) / (B + 1.0);
  out.reject = t_max > out.quantile;
  out.alpha = alpha;
  out.B = B;
  return out;
}

}  // namespace grip
