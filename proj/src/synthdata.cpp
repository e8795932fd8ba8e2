#include "grip/synthdata.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace grip {

Dataset split_dataset(const Eigen::MatrixXd& w, const Eigen::VectorXd& y,
                      const std::vector<int>& test_indices) {
  const int p = static_cast<int>(w.cols());
  if (w.rows() != y.size())
    throw std::invalid_argument("split_dataset: row count of w must match y");
  if (test_indices.empty())
    throw std::invalid_argument("split_dataset: test index set is empty");
  std::set<int> seen;
  for (int idx : test_indices) {
    if (idx < 1 || idx > p)
      throw std::invalid_argument("split_dataset: test index " +
                                  std::to_string(idx) + " outside [1, " +
                                  std::to_string(p) + "]");
    if (!seen.insert(idx).second)
      throw std::invalid_argument("split_dataset: duplicate test index " +
                                  std::to_string(idx));
  }
  const int d = static_cast<int>(test_indices.size());
  if (d >= p)
    throw std::invalid_argument(
        "split_dataset: at least one control column must remain");

  Dataset out;
  out.y = y;
  out.z.resize(w.rows(), d);
  for (int j = 0; j < d; ++j) out.z.col(j) = w.col(test_indices[j] - 1);
  out.x.resize(w.rows(), p - d);
  int col = 0;
  for (int j = 1; j <= p; ++j)
    if (!seen.count(j)) out.x.col(col++) = w.col(j - 1);
  return out;
}

Eigen::MatrixXd make_covariance(const CovarianceSpec& spec) {
  if (spec.dim < 1)
    throw std::invalid_argument("make_covariance: dim must be >= 1");
  Eigen::MatrixXd sigma(spec.dim, spec.dim);
  switch (spec.kind) {
    case CovKind::Identity:
      sigma.setIdentity();
      break;
    case CovKind::Toeplitz: {
      if (!(std::abs(spec.rho) < 1.0))
        throw std::invalid_argument(
            "make_covariance: Toeplitz rho must lie in (-1, 1)");
      for (int i = 0; i < spec.dim; ++i)
        for (int j = 0; j < spec.dim; ++j)
          sigma(i, j) = std::pow(spec.rho, std::abs(i - j));
      break;
    }
    case CovKind::Equicorrelation: {
      if (!(spec.rho >= 0.0 && spec.rho < 1.0))
        throw std::invalid_argument(
            "make_covariance: equicorrelation rho must lie in [0, 1)");
      sigma.setConstant(spec.rho);
      sigma.diagonal().setOnes();
      break;
    }
  }
  return sigma;
}

Eigen::MatrixXd sample_design(const DesignSpec& spec, int n, RngStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_design: n must be >= 1");
  const int dim = spec.covariance.dim;
  const bool raw_t = spec.entry_law == EntryLaw::StudentT;
  if (raw_t && spec.df < 3)
    throw std::invalid_argument(
        "sample_design: StudentT needs df >= 3 for a finite variance");

  const double t_scale =
      raw_t && spec.standardize
          ? 1.0 / std::sqrt(static_cast<double>(spec.df) / (spec.df - 2))
          : 1.0;

  Eigen::MatrixXd entries(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j)
      entries(i, j) =
          raw_t ? t_scale * stream.student_t(spec.df) : stream.normal();

  if (spec.covariance.kind == CovKind::Identity) return entries;

  const Eigen::MatrixXd sigma = make_covariance(spec.covariance);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "sample_design: covariance is not positive definite");
  // Row i of the output is L * v_i, i.e. entries * L^T.
  return entries * llt.matrixU();
}

Eigen::VectorXd make_beta_star(int s, int p, RngStream& stream) {
  if (s < 1)
    throw std::invalid_argument(
        "make_beta_star: s must be >= 1 (an all-zero vector cannot be "
        "normalized)");
  const int limit = (3 * s) / 2;
  if (limit > p)
    throw std::invalid_argument(
        "make_beta_star: p too small for the requested sparsity");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
  for (int j = 1; j <= limit; ++j)
    if (j % 3 != 0) a[j - 1] = stream.uniform01();
  const double norm = a.norm();
  if (norm == 0.0)
    throw std::invalid_argument("make_beta_star: degenerate all-zero draw");
  return 5.0 * a / norm;
}

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, RngStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_noise: n must be >= 1");
  if (spec.sigma <= 0.0)
    throw std::invalid_argument("sample_noise: sigma must be positive");
  Eigen::VectorXd eps(n);
  switch (spec.kind) {
    case NoiseKind::IidGaussian:
      for (int i = 0; i < n; ++i) eps[i] = spec.sigma * stream.normal();
      break;
    case NoiseKind::Ar1: {
      if (!(std::abs(spec.phi) < 1.0))
        throw std::invalid_argument("sample_noise: AR(1) phi must lie in (-1, 1)");
      // Stationary start, then innovations scaled to keep the marginal
      // variance at sigma^2.
      const double innov = spec.sigma * std::sqrt(1.0 - spec.phi * spec.phi);
      eps[0] = spec.sigma * stream.normal();
      for (int t = 1; t < n; ++t)
        eps[t] = spec.phi * eps[t - 1] + innov * stream.normal();
      break;
    }
  }
  return eps;
}

SimDataset simulate_dataset(const DesignSpec& design, const Eigen::VectorXd& beta,
                            const NoiseSpec& noise, int n,
                            std::vector<int> test_indices, std::uint64_t seed) {
  if (beta.size() != design.covariance.dim)
    throw std::invalid_argument(
        "simulate_dataset: beta length must match the design dimension");
  RngStream root(seed);
  RngStream design_stream = root.substream(0);
  RngStream noise_stream = root.substream(1);

  SimDataset out;
  out.w = sample_design(design, n, design_stream);
  out.noise = sample_noise(noise, n, noise_stream);
  out.beta_star = beta;
  out.y = out.w * beta + out.noise;
  out.test_indices = std::move(test_indices);
  out.seed = seed;
  // Validates the index set eagerly so a bad configuration fails here.
  (void)split_dataset(out.w, out.y, out.test_indices);
  return out;
}

}  // namespace grip
