#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "grip/dataset.hpp"
#include "grip/rng.hpp"

namespace grip {

enum class CovKind { Identity, Toeplitz, Equicorrelation };

// Covariance family for design rows. Toeplitz has entries rho^|i-j|,
// equicorrelation has unit diagonal and constant off-diagonal rho.
struct CovarianceSpec {
  CovKind kind = CovKind::Identity;
  int dim = 0;
  double rho = 0.0;

  static CovarianceSpec identity(int dim) { return {CovKind::Identity, dim, 0.0}; }
  static CovarianceSpec toeplitz(double rho, int dim) {
    return {CovKind::Toeplitz, dim, rho};
  }
  static CovarianceSpec equicorrelation(double rho, int dim) {
    return {CovKind::Equicorrelation, dim, rho};
  }
};

enum class EntryLaw { Gaussian, StudentT };

// Law of the whitened design entries. Rows are L*v with L the lower Cholesky
// factor of the covariance and v i.i.d. from entry_law. StudentT keeps the
// raw t(df) variance df/(df-2) unless standardize is set.
struct DesignSpec {
  CovarianceSpec covariance;
  EntryLaw entry_law = EntryLaw::Gaussian;
  int df = 6;
  bool standardize = false;
};

enum class NoiseKind { IidGaussian, Ar1 };

// Error law: i.i.d. N(0, sigma^2), or a stationary AR(1) with autoregression
// phi and marginal variance sigma^2.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::IidGaussian;
  double sigma = 1.0;
  double phi = 0.0;

  static NoiseSpec iid_gaussian(double sigma) {
    return {NoiseKind::IidGaussian, sigma, 0.0};
  }
  static NoiseSpec ar1(double phi, double sigma) {
    return {NoiseKind::Ar1, sigma, phi};
  }
};

// One synthetic regression sample. The realized noise is stored so the
// identity y = w * beta_star + noise stays checkable after generation.
struct SimDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd w;
  Eigen::VectorXd beta_star;
  std::vector<int> test_indices;  // 1-based
  std::uint64_t seed = 0;
  Eigen::VectorXd noise;

  Dataset split() const { return split_dataset(w, y, test_indices); }
};

// Dense covariance matrix for the spec; throws std::invalid_argument when the
// parameters do not give a positive definite matrix.
Eigen::MatrixXd make_covariance(const CovarianceSpec& spec);

// n rows, each L*v with v i.i.d. entries from the spec's law. Entries are
// drawn row by row, coordinate order within a row.
Eigen::MatrixXd sample_design(const DesignSpec& spec, int n, RngStream& stream);

// Coefficient vector with s nonzero entries: a_j ~ Uniform(0,1) for 1-based
// j <= floor(3s/2) with j not divisible by 3 (draws in increasing j), zero
// elsewhere, scaled to l2 norm 5.
Eigen::VectorXd make_beta_star(int s, int p, RngStream& stream);

// Error vector of length n; one normal variate is consumed per observation,
// in time order, for both noise kinds.
Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, RngStream& stream);

// Full sample: design and noise streams are derived from the seed
// (substreams 0 and 1 of RngStream(seed)), so a seed pins down the dataset.
SimDataset simulate_dataset(const DesignSpec& design, const Eigen::VectorXd& beta,
                            const NoiseSpec& noise, int n,
                            std::vector<int> test_indices, std::uint64_t seed);

}  // namespace grip
