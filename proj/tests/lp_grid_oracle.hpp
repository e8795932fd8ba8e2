#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "grip/rng.hpp"

namespace griptest {

// Randomized small instances of the l1-minimization program together with a
// lattice-search oracle. The oracle scans each coordinate over the grid
// {-10, -10+step, ..., 10}; with two columns the inner coordinate is resolved
// analytically to the best lattice point inside its feasible interval, which
// matches the full two-dimensional scan.

struct LpInstance {
  Eigen::MatrixXd A;
  Eigen::VectorXd g;
  double eta = 0.0;
  double etabar = 0.0;
  double mu = 0.0;
  Eigen::VectorXd probe;  // feasible lattice point used to calibrate bounds
};

constexpr double kGridStep = 1e-3;
constexpr int kGridRadius = 10000;
constexpr double kGridFeasTol = 1e-9;

inline double round_to_lattice(double v) {
  return kGridStep * std::round(v / kGridStep);
}

// Signed worst violation over all three constraint families.
inline double instance_violation(const LpInstance& inst,
                                 const Eigen::VectorXd& xi) {
  const double n = static_cast<double>(inst.A.rows());
  Eigen::VectorXd resid = inst.g - inst.A * xi;
  double v =
      (inst.A.transpose() * resid / n).lpNorm<Eigen::Infinity>() - inst.eta;
  v = std::max(v, inst.etabar - inst.g.dot(resid) / n);
  return std::max(v, resid.lpNorm<Eigen::Infinity>() - inst.mu);
}

inline bool grid_feasible(const LpInstance& inst, const Eigen::VectorXd& xi) {
  return instance_violation(inst, xi) <= kGridFeasTol;
}

inline double grid_optimum_1d(const LpInstance& inst) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd xi(1);
  for (int k = -kGridRadius; k <= kGridRadius; ++k) {
    xi[0] = kGridStep * k;
    if (std::abs(xi[0]) < best && grid_feasible(inst, xi))
      best = std::abs(xi[0]);
  }
  return best;
}

inline double grid_optimum_2d(const LpInstance& inst) {
  const double n = static_cast<double>(inst.A.rows());
  const Eigen::VectorXd a1 = inst.A.col(0);
  const Eigen::VectorXd a2 = inst.A.col(1);
  const Eigen::VectorXd grad_q = -(inst.A.transpose() * a2) / n;
  const double inner_q = -inst.g.dot(a2) / n;

  double best = std::numeric_limits<double>::infinity();
  for (int k1 = -kGridRadius; k1 <= kGridRadius; ++k1) {
    const double xi1 = kGridStep * k1;
    if (std::abs(xi1) >= best) continue;

    double lo = -kGridStep * kGridRadius;
    double hi = kGridStep * kGridRadius;
    bool open = true;
    // Each family row reads lower <= p + q*xi2 <= upper once xi1 is fixed.
    auto clip = [&](double p, double q, double lower, double upper) {
      lower -= kGridFeasTol;
      upper += kGridFeasTol;
      if (q > 0.0) {
        lo = std::max(lo, (lower - p) / q);
        hi = std::min(hi, (upper - p) / q);
      } else if (q < 0.0) {
        lo = std::max(lo, (upper - p) / q);
        hi = std::min(hi, (lower - p) / q);
      } else if (p < lower || p > upper) {
        open = false;
      }
    };

    const Eigen::VectorXd r = inst.g - a1 * xi1;
    const Eigen::VectorXd grad_p = inst.A.transpose() * r / n;
    for (int k = 0; k < 2 && open; ++k)
      clip(grad_p[k], grad_q[k], -inst.eta, inst.eta);
    if (open)
      clip(inst.g.dot(r) / n, inner_q, inst.etabar,
           std::numeric_limits<double>::infinity());
    for (int i = 0; i < r.size() && open; ++i)
      clip(r[i], -a2[i], -inst.mu, inst.mu);
    if (!open) continue;

    long k_lo = static_cast<long>(std::ceil(lo / kGridStep - 1e-9));
    long k_hi = static_cast<long>(std::floor(hi / kGridStep + 1e-9));
    k_lo = std::max(k_lo, static_cast<long>(-kGridRadius));
    k_hi = std::min(k_hi, static_cast<long>(kGridRadius));
    if (k_lo > k_hi) continue;
    const long k2 = k_lo > 0 ? k_lo : (k_hi < 0 ? k_hi : 0);
    best = std::min(best, std::abs(xi1) + kGridStep * std::abs(k2));
  }
  return best;
}

inline double grid_optimum(const LpInstance& inst) {
  return inst.A.cols() == 1 ? grid_optimum_1d(inst) : grid_optimum_2d(inst);
}

// Draws an instance whose bounds are calibrated around a known feasible
// lattice probe, so the optimum lies well inside the searched box.
inline LpInstance make_lp_instance(grip::RngStream& stream) {
  for (;;) {
    const int n = 2 + static_cast<int>(stream.next_u64() % 7);
    const int m = 1 + static_cast<int>(stream.next_u64() % 2);
    Eigen::MatrixXd A(n, m);
    for (int j = 0; j < m; ++j) {
      do {
        for (int i = 0; i < n; ++i) A(i, j) = stream.normal();
      } while (A.col(j).norm() < 0.3);
    }
    Eigen::VectorXd xi_true(m);
    for (int j = 0; j < m; ++j) xi_true[j] = 4.0 * stream.uniform01() - 2.0;
    Eigen::VectorXd g = A * xi_true;
    for (int i = 0; i < n; ++i) g[i] += 0.5 * stream.normal();

    Eigen::VectorXd probe(m);
    for (int j = 0; j < m; ++j) probe[j] = round_to_lattice(0.5 * xi_true[j]);
    const Eigen::VectorXd resid = g - A * probe;
    const double v = g.dot(resid) / n;
    if (v <= 0.02) continue;

    LpInstance inst;
    inst.A = std::move(A);
    inst.g = std::move(g);
    inst.probe = std::move(probe);
    inst.eta =
        1.5 * (inst.A.transpose() * resid / n).lpNorm<Eigen::Infinity>() + 0.05;
    inst.etabar = 0.5 * v;
    inst.mu = 1.5 * resid.lpNorm<Eigen::Infinity>() + 0.05;
    return inst;
  }
}

}  // namespace griptest
