#pragma once

#include <Eigen/Dense>

#include "grip/rng.hpp"
#include "grip/statistic.hpp"

namespace grip {

// Multiplier law: one independent standard normal per observation, or the
// blocked variant where each big block of q observations shares one normal
// and r separator observations between blocks are zeroed.
struct MultiplierScheme {
  enum class Kind { IidGaussian, Block };
  Kind kind = Kind::IidGaussian;
  int q = 0;
  int r = 0;

  static MultiplierScheme iid() { return {}; }
  static MultiplierScheme block(int q, int r) {
    return {Kind::Block, q, r};
  }
  // Rate-balanced defaults q = ceil(n^{2/3}), r = ceil(n^{1/3}).
  static MultiplierScheme block_defaults(int n);
};

// One blocked multiplier vector: 1-based positions 1+(q+r)k .. (q+r)k+q form
// big block k (k = 0 .. floor(n/(q+r))-1) and carry the k-th drawn normal
// (one draw per block, in block order); all other positions are zero.
// Throws std::invalid_argument unless q > r >= 1 and floor(n/(q+r)) >= 1.
Eigen::VectorXd draw_block_multipliers(int n, int q, int r, RngStream& stream);

// B sup-norms of multiplier-perturbed column sums. Draw b uses substream b of
// `stream` (taken by value, caller state untouched), drawing the multipliers
// xi per scheme, and records
//   max_j | n^{-1/2} sum_i xi_i (rows(i,j) - colmean_j) |
// where colmean_j is the column mean of stat.rows.
Eigen::VectorXd bootstrap_distribution(const TestStatistic& stat,
                                       const MultiplierScheme& scheme, int B,
                                       RngStream stream);

struct BootstrapResult {
  Eigen::VectorXd draws;
  double quantile = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.0;
  int B = 0;
};

// Order-statistic quantile at rank ceil(B(1-alpha)), add-one p-value
// (1 + #{b : draws[b] >= t_max}) / (B+1), and the strict-inequality decision
// t_max > quantile. Warns on stderr when B < ceil(1/alpha).
BootstrapResult quantile_and_decide(double t_max, const Eigen::VectorXd& draws,
                                    double alpha);

}  // namespace grip
