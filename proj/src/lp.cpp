#include "grip/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grip {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ----------------------------------------------------------------------------
// Generic Mehrotra predictor-corrector loop over an inequality-form problem
//   min c^T x   s.t.   G x + s = h,  s >= 0
// The problem object owns the (implicit) constraint matrix and the normal
// equation factorization; the loop only sees matrix-vector products.
// ----------------------------------------------------------------------------

class IpmProblem {
 public:
  virtual ~IpmProblem() = default;
  virtual int num_vars() const = 0;
  virtual int num_rows() const = 0;
  virtual const VectorXd& rhs() const = 0;   // h
  virtual const VectorXd& cost() const = 0;  // c
  virtual void mat_vec(const VectorXd& x, VectorXd& out) const = 0;   // G x
  virtual void matT_vec(const VectorXd& v, VectorXd& out) const = 0;  // G^T v
  // Builds and factors G^T diag(w) G (plus a tiny ridge); returns false if
  // the factorization cannot be salvaged.
  virtual bool factor(const VectorXd& weights) = 0;
  virtual void solve_normal(const VectorXd& rhs_x, VectorXd& dx) const = 0;
};

enum class IpmStatus { Optimal, LooseOptimal, Stalled, IterLimit, FactorFail };

struct IpmResult {
  VectorXd x;
  IpmStatus status = IpmStatus::IterLimit;
  int iterations = 0;
};

// Largest step a in [0, cap] keeping v + a*dv >= 0.
double ratio_step(const VectorXd& v, const VectorXd& dv, double cap) {
  double a = cap;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

IpmResult run_mehrotra(IpmProblem& prob, const VectorXd& x0, const VectorXd& s0,
                       int max_iter) {
  const int nv = prob.num_vars();
  const int nr = prob.num_rows();
  const VectorXd& h = prob.rhs();
  const VectorXd& c = prob.cost();

  VectorXd x = x0;
  VectorXd s = s0;
  VectorXd z = VectorXd::Ones(nr);

  const double tol_p = 1e-9 * (1.0 + h.lpNorm<Eigen::Infinity>());
  const double tol_d = 1e-9 * (1.0 + c.lpNorm<Eigen::Infinity>());
  const double tol_d_ceiling = 1e-4 * (1.0 + c.lpNorm<Eigen::Infinity>());
  const double loose = 100.0;
  int near_count = 0;
  double best_dinf = std::numeric_limits<double>::infinity();

  VectorXd gx(nr), rp(nr), rd(nv), w(nr), v(nr), rhs_x(nv);
  VectorXd dx(nv), ds(nr), dz(nr), dx_aff(nv), ds_aff(nr), dz_aff(nr);

  IpmResult out;
  for (int iter = 0; iter < max_iter; ++iter) {
    prob.mat_vec(x, gx);
    rp = gx + s - h;
    prob.matT_vec(z, rd);
    rd += c;
    const double mu_gap = s.dot(z) / nr;
    const double obj = c.dot(x);
    const double pinf = rp.lpNorm<Eigen::Infinity>();
    const double dinf = rd.lpNorm<Eigen::Infinity>();
    const double tol_g = 1e-11 * (1.0 + std::abs(obj));

    if (pinf <= tol_p && dinf <= tol_d && mu_gap <= tol_g) {
      out.x = x;
      out.status = IpmStatus::Optimal;
      out.iterations = iter;
      return out;
    }

    // Ill-conditioned endgames pin the dual residual at whatever floor the
    // normal-equation assembly allows, long after the primal has converged;
    // accept once the duals stagnate at that floor instead of iterating them
    // into breakdown.
    if (pinf <= tol_p && mu_gap <= loose * tol_g && dinf <= tol_d_ceiling &&
        dinf > 0.5 * best_dinf) {
      if (++near_count >= 3) {
        out.x = x;
        out.status = IpmStatus::LooseOptimal;
        out.iterations = iter;
        return out;
      }
    } else {
      near_count = 0;
    }
    best_dinf = std::min(best_dinf, dinf);
    if (mu_gap <= 0.0) {  // complementarity underflow, nothing left to steer
      out.x = x;
      out.status = IpmStatus::Stalled;
      out.iterations = iter;
      return out;
    }

    w = z.cwiseQuotient(s);
    if (!prob.factor(w)) {
      out.x = x;
      out.status = IpmStatus::FactorFail;
      out.iterations = iter;
      return out;
    }

    // Affine predictor: complementarity target 0.
    v = -z + w.cwiseProduct(rp);
    prob.matT_vec(v, rhs_x);
    rhs_x = -rd - rhs_x;
    prob.solve_normal(rhs_x, dx_aff);
    prob.mat_vec(dx_aff, ds_aff);
    ds_aff = -rp - ds_aff;
    dz_aff = (-s.cwiseProduct(z) - z.cwiseProduct(ds_aff)).cwiseQuotient(s);

    const double ap_aff = ratio_step(s, ds_aff, 1.0);
    const double ad_aff = ratio_step(z, dz_aff, 1.0);
    const double mu_aff =
        (s + ap_aff * ds_aff).dot(z + ad_aff * dz_aff) / nr;
    double sigma = std::pow(mu_aff / mu_gap, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector with centering, reusing the factorization.
    VectorXd rc = -s.cwiseProduct(z) - ds_aff.cwiseProduct(dz_aff);
    rc.array() += sigma * mu_gap;
    v = rc.cwiseQuotient(s) + w.cwiseProduct(rp);
    prob.matT_vec(v, rhs_x);
    rhs_x = -rd - rhs_x;
    prob.solve_normal(rhs_x, dx);
    prob.mat_vec(dx, ds);
    ds = -rp - ds;
    dz = (rc - z.cwiseProduct(ds)).cwiseQuotient(s);

    const double damp = mu_gap < 1e-5 ? 0.9995 : 0.995;
    const double ap = std::min(1.0, damp * ratio_step(s, ds, 1.0 / damp));
    const double ad = std::min(1.0, damp * ratio_step(z, dz, 1.0 / damp));

    if (ap < 1e-11 && ad < 1e-11) {
      out.x = x;
      out.status = (pinf <= loose * tol_p && dinf <= loose * tol_d &&
                    mu_gap <= loose * tol_g)
                       ? IpmStatus::LooseOptimal
                       : IpmStatus::Stalled;
      out.iterations = iter;
      return out;
    }

    x += ap * dx;
    s += ap * ds;
    z += ad * dz;
  }

  // Iteration cap: report what we have; the caller re-checks feasibility.
  prob.mat_vec(x, gx);
  rp = gx + s - h;
  prob.matT_vec(z, rd);
  rd += c;
  const double mu_gap = s.dot(z) / nr;
  const bool near = rp.lpNorm<Eigen::Infinity>() <= loose * tol_p &&
                    rd.lpNorm<Eigen::Infinity>() <= tol_d_ceiling &&
                    mu_gap <= loose * 1e-11 * (1.0 + std::abs(c.dot(x)));
  out.x = x;
  out.status = near ? IpmStatus::LooseOptimal : IpmStatus::IterLimit;
  out.iterations = max_iter;
  return out;
}

// ----------------------------------------------------------------------------
// Main problem: variables (xi, t) in R^{2m}, minimize 1^T t, rows
//   [E+] B xi <= b + eta          [E-] -B xi <= eta - b
//   [R ] b^T xi <= c0 - etabar
//   [M+] A xi <= g + mu           [M-] -A xi <= mu - g
//   [L+] xi - t <= 0              [L-] -xi - t <= 0
// with B = A^T A / n, b = A^T g / n, c0 = g^T g / n. The normal equations are
// reduced to an m x m system: the t-block is diagonal and is eliminated, and
// the E/M sandwich is computed through an n x n inner matrix, which is the
// cheap direction when m > n.
// ----------------------------------------------------------------------------

class Phase2Problem final : public IpmProblem {
 public:
  Phase2Problem(const MatrixXd& A, const MatrixXd& gram, const VectorXd& b,
                double c0, const VectorXd& g, double eta, double etabar,
                double mu)
      : A_(A), gram_(gram), b_(b) {
    n_ = static_cast<int>(A.rows());
    m_ = static_cast<int>(A.cols());
    rows_ = 4 * m_ + 2 * n_ + 1;
    h_.resize(rows_);
    h_.segment(0, m_) = b.array() + eta;
    h_.segment(m_, m_) = eta - b.array();
    h_[2 * m_] = c0 - etabar;
    h_.segment(2 * m_ + 1, n_) = g.array() + mu;
    h_.segment(2 * m_ + 1 + n_, n_) = mu - g.array();
    h_.segment(2 * m_ + 1 + 2 * n_, 2 * m_).setZero();
    c_ = VectorXd::Zero(2 * m_);
    c_.tail(m_).setOnes();
  }

  int num_vars() const override { return 2 * m_; }
  int num_rows() const override { return rows_; }
  const VectorXd& rhs() const override { return h_; }
  const VectorXd& cost() const override { return c_; }

  void mat_vec(const VectorXd& x, VectorXd& out) const override {
    const auto xi = x.head(m_);
    const auto t = x.tail(m_);
    VectorXd bxi = gram_ * xi;
    VectorXd axi = A_ * xi;
    out.resize(rows_);
    out.segment(0, m_) = bxi;
    out.segment(m_, m_) = -bxi;
    out[2 * m_] = b_.dot(xi);
    out.segment(2 * m_ + 1, n_) = axi;
    out.segment(2 * m_ + 1 + n_, n_) = -axi;
    out.segment(2 * m_ + 1 + 2 * n_, m_) = xi - t;
    out.segment(3 * m_ + 1 + 2 * n_, m_) = -xi - t;
  }

  void matT_vec(const VectorXd& v, VectorXd& out) const override {
    const auto ve = v.segment(0, m_) - v.segment(m_, m_);
    const auto vm = v.segment(2 * m_ + 1, n_) - v.segment(2 * m_ + 1 + n_, n_);
    const auto vlp = v.segment(2 * m_ + 1 + 2 * n_, m_);
    const auto vlm = v.segment(3 * m_ + 1 + 2 * n_, m_);
    out.resize(2 * m_);
    out.head(m_) = gram_ * ve + b_ * v[2 * m_] + A_.transpose() * vm + (vlp - vlm);
    out.tail(m_) = -vlp - vlm;
  }

  bool factor(const VectorXd& w) override {
    const auto wep = w.segment(0, m_);
    const auto wem = w.segment(m_, m_);
    const double wr = w[2 * m_];
    const auto wmp = w.segment(2 * m_ + 1, n_);
    const auto wmm = w.segment(2 * m_ + 1 + n_, n_);
    const auto wlp = w.segment(2 * m_ + 1 + 2 * n_, m_);
    const auto wlm = w.segment(3 * m_ + 1 + 2 * n_, m_);

    VectorXd de = wep + wem;
    dsum_ = wlp + wlm;
    ddif_ = wlm - wlp;

    // Inner n x n matrix: diag(M weights) + A diag(E weights) A^T / n^2.
    MatrixXd inner = (A_ * de.asDiagonal() * A_.transpose()) /
                     (static_cast<double>(n_) * static_cast<double>(n_));
    inner.diagonal() += wmp + wmm;

    schur_.noalias() = A_.transpose() * (inner * A_);
    schur_.noalias() += wr * (b_ * b_.transpose());
    // Eliminated t-block leaves the harmonic combination of the L weights.
    schur_.diagonal() += (4.0 * wlp.cwiseProduct(wlm)).cwiseQuotient(dsum_);

    const double ridge = 1e-12 * (1.0 + schur_.trace() / m_);
    schur_.diagonal().array() += ridge;
    llt_.compute(schur_);
    if (llt_.info() == Eigen::Success) return true;
    schur_.diagonal().array() += 1e6 * ridge;
    llt_.compute(schur_);
    return llt_.info() == Eigen::Success;
  }

  void solve_normal(const VectorXd& rhs_x, VectorXd& dx) const override {
    const auto r1 = rhs_x.head(m_);
    const auto r2 = rhs_x.tail(m_);
    VectorXd reduced = r1 - ddif_.cwiseProduct(r2).cwiseQuotient(dsum_);
    dx.resize(2 * m_);
    dx.head(m_) = llt_.solve(reduced);
    dx.tail(m_) = (r2 - ddif_.cwiseProduct(dx.head(m_))).cwiseQuotient(dsum_);
  }

  // Standard infeasible start: xi = 0, t = 1, generous positive slacks.
  void initial_point(double slack_floor, VectorXd& x0, VectorXd& s0) const {
    x0 = VectorXd::Zero(2 * m_);
    x0.tail(m_).setOnes();
    VectorXd gx(rows_);
    mat_vec(x0, gx);
    s0 = (h_ - gx).cwiseMax(slack_floor);
  }

 private:
  const MatrixXd& A_;
  const MatrixXd& gram_;
  VectorXd b_;
  int n_ = 0, m_ = 0, rows_ = 0;
  VectorXd h_, c_;
  MatrixXd schur_;
  VectorXd dsum_, ddif_;
  Eigen::LLT<MatrixXd> llt_;
};

// ----------------------------------------------------------------------------
// Elastic feasibility problem: variables (xi, tau), minimize tau, rows
//   [E/R/M as above, each relaxed by -tau]   and   -tau <= 1.
// Its optimum is the smallest uniform relaxation making the region nonempty,
// so tau* > tol certifies infeasibility. The normal matrix is the bordered
// E/R/M sandwich plus a ridge (the xi-block alone can be rank deficient when
// m > n).
// ----------------------------------------------------------------------------

class Phase1Problem final : public IpmProblem {
 public:
  Phase1Problem(const MatrixXd& A, const MatrixXd& gram, const VectorXd& b,
                double c0, const VectorXd& g, double eta, double etabar,
                double mu)
      : A_(A), gram_(gram), b_(b) {
    n_ = static_cast<int>(A.rows());
    m_ = static_cast<int>(A.cols());
    rows_ = 2 * m_ + 2 * n_ + 2;
    h_.resize(rows_);
    h_.segment(0, m_) = b.array() + eta;
    h_.segment(m_, m_) = eta - b.array();
    h_[2 * m_] = c0 - etabar;
    h_.segment(2 * m_ + 1, n_) = g.array() + mu;
    h_.segment(2 * m_ + 1 + n_, n_) = mu - g.array();
    h_[rows_ - 1] = 1.0;  // tau >= -1
    c_ = VectorXd::Zero(m_ + 1);
    c_[m_] = 1.0;
  }

  int num_vars() const override { return m_ + 1; }
  int num_rows() const override { return rows_; }
  const VectorXd& rhs() const override { return h_; }
  const VectorXd& cost() const override { return c_; }

  void mat_vec(const VectorXd& x, VectorXd& out) const override {
    const auto xi = x.head(m_);
    const double tau = x[m_];
    VectorXd bxi = gram_ * xi;
    VectorXd axi = A_ * xi;
    out.resize(rows_);
    out.segment(0, m_) = bxi.array() - tau;
    out.segment(m_, m_) = -bxi.array() - tau;
    out[2 * m_] = b_.dot(xi) - tau;
    out.segment(2 * m_ + 1, n_) = axi.array() - tau;
    out.segment(2 * m_ + 1 + n_, n_) = -axi.array() - tau;
    out[rows_ - 1] = -tau;
  }

  void matT_vec(const VectorXd& v, VectorXd& out) const override {
    const auto ve = v.segment(0, m_) - v.segment(m_, m_);
    const auto vm = v.segment(2 * m_ + 1, n_) - v.segment(2 * m_ + 1 + n_, n_);
    out.resize(m_ + 1);
    out.head(m_) = gram_ * ve + b_ * v[2 * m_] + A_.transpose() * vm;
    out[m_] = -v.sum();  // every row carries a -tau coefficient
  }

  bool factor(const VectorXd& w) override {
    const auto wep = w.segment(0, m_);
    const auto wem = w.segment(m_, m_);
    const double wr = w[2 * m_];
    const auto wmp = w.segment(2 * m_ + 1, n_);
    const auto wmm = w.segment(2 * m_ + 1 + n_, n_);

    VectorXd de = wep + wem;
    MatrixXd inner = (A_ * de.asDiagonal() * A_.transpose()) /
                     (static_cast<double>(n_) * static_cast<double>(n_));
    inner.diagonal() += wmp + wmm;

    normal_.resize(m_ + 1, m_ + 1);
    normal_.topLeftCorner(m_, m_).noalias() = A_.transpose() * (inner * A_);
    normal_.topLeftCorner(m_, m_).noalias() += wr * (b_ * b_.transpose());
    VectorXd q = gram_ * (wep - wem) + b_ * wr +
                 A_.transpose() * (wmp - wmm);
    normal_.col(m_).head(m_) = -q;
    normal_.row(m_).head(m_) = -q.transpose();
    normal_(m_, m_) = w.sum();

    const double ridge = 1e-11 * (1.0 + normal_.trace() / (m_ + 1));
    normal_.diagonal().array() += ridge;
    ldlt_.compute(normal_);
    if (ldlt_.info() == Eigen::Success) return true;
    normal_.diagonal().array() += 1e6 * ridge;
    ldlt_.compute(normal_);
    return ldlt_.info() == Eigen::Success;
  }

  void solve_normal(const VectorXd& rhs_x, VectorXd& dx) const override {
    dx = ldlt_.solve(rhs_x);
  }

  void initial_point(VectorXd& x0, VectorXd& s0) const {
    const double tau0 =
        std::max(0.0, -h_.head(rows_ - 1).minCoeff()) + 1.0;
    x0 = VectorXd::Zero(m_ + 1);
    x0[m_] = tau0;
    VectorXd gx(rows_);
    mat_vec(x0, gx);
    s0 = h_ - gx;  // strictly positive by construction of tau0
  }

 private:
  const MatrixXd& A_;
  const MatrixXd& gram_;
  VectorXd b_;
  int n_ = 0, m_ = 0, rows_ = 0;
  VectorXd h_, c_;
  MatrixXd normal_;
  Eigen::LDLT<MatrixXd> ldlt_;
};

struct FamilyResiduals {
  double gradient = 0.0;  // ||b - B xi||_inf - eta
  double inner = 0.0;     // etabar - (c0 - b^T xi)
  double residual = 0.0;  // ||g - A xi||_inf - mu

  double worst() const { return std::max({gradient, inner, residual}); }

  ConstraintFamily worst_family() const {
    if (gradient >= inner && gradient >= residual)
      return ConstraintFamily::GradientBound;
    if (inner >= residual) return ConstraintFamily::InnerProduct;
    return ConstraintFamily::ResidualBound;
  }
};

FamilyResiduals family_residuals(const MatrixXd& A, const MatrixXd& gram,
                                 const VectorXd& b, double c0,
                                 const VectorXd& g, double eta, double etabar,
                                 double mu, const VectorXd& xi) {
  FamilyResiduals out;
  out.gradient = (b - gram * xi).lpNorm<Eigen::Infinity>() - eta;
  out.inner = etabar - (c0 - b.dot(xi));
  out.residual = (g - A * xi).lpNorm<Eigen::Infinity>() - mu;
  return out;
}

}  // namespace

const char* constraint_family_name(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::GradientBound:
      return "gradient sup-norm";
    case ConstraintFamily::InnerProduct:
      return "inner-product lower bound";
    case ConstraintFamily::ResidualBound:
      return "residual sup-norm";
  }
  return "unknown";
}

L1ConstrainedLp::L1ConstrainedLp(Eigen::MatrixXd A) : A_(std::move(A)) {
  if (A_.rows() < 1 || A_.cols() < 1)
    throw std::invalid_argument("l1_constrained_lp: A must be nonempty");
  for (int j = 0; j < A_.cols(); ++j)
    if (A_.col(j).norm() == 0.0)
      throw std::invalid_argument(
          "l1_constrained_lp: column " + std::to_string(j + 1) +
          " of A has zero norm");
  gram_ = A_.transpose() * A_ / static_cast<double>(A_.rows());
}

LpSolution L1ConstrainedLp::solve(const Eigen::VectorXd& g, double eta,
                                  double etabar, double mu, double tol) const {
  const int n = static_cast<int>(A_.rows());
  const int m = static_cast<int>(A_.cols());
  if (g.size() != n)
    throw std::invalid_argument("l1_constrained_lp: g length must match rows of A");
  if (eta < 0.0)
    throw std::invalid_argument("l1_constrained_lp: eta must be nonnegative");
  if (mu <= 0.0)
    throw std::invalid_argument("l1_constrained_lp: mu must be positive");
  if (tol <= 0.0)
    throw std::invalid_argument("l1_constrained_lp: tol must be positive");

  const VectorXd b = A_.transpose() * g / n;
  const double c0 = g.squaredNorm() / n;

  // Rows whose gradient vanishes identically are decided here.
  if (b.lpNorm<Eigen::Infinity>() == 0.0 && c0 - etabar < 0.0) {
    std::ostringstream msg;
    msg << "infeasible (" << constraint_family_name(ConstraintFamily::InnerProduct)
        << "): g^T (g - A xi) / n equals " << c0
        << " for every xi, below etabar = " << etabar;
    throw InfeasibleError(ConstraintFamily::InnerProduct, msg.str());
  }
  for (int i = 0; i < n; ++i) {
    if (A_.row(i).cwiseAbs().maxCoeff() == 0.0 && std::abs(g[i]) > mu) {
      std::ostringstream msg;
      msg << "infeasible (" << constraint_family_name(ConstraintFamily::ResidualBound)
          << "): observation " << i + 1 << " has |g_i| = " << std::abs(g[i])
          << " > mu = " << mu << " and a zero design row";
      throw InfeasibleError(ConstraintFamily::ResidualBound, msg.str());
    }
  }

  Phase2Problem main(A_, gram_, b, c0, g, eta, etabar, mu);

  auto extract = [&](const IpmResult& res) {
    LpSolution sol;
    sol.xi = res.x.head(m);
    sol.objective = sol.xi.lpNorm<1>();
    sol.iterations = res.iterations;
    sol.max_violation =
        family_residuals(A_, gram_, b, c0, g, eta, etabar, mu, sol.xi).worst();
    return sol;
  };

  VectorXd x0, s0;
  main.initial_point(1.0, x0, s0);
  IpmResult res = run_mehrotra(main, x0, s0, 120);
  if (res.status == IpmStatus::Optimal || res.status == IpmStatus::LooseOptimal) {
    LpSolution sol = extract(res);
    if (sol.max_violation <= tol) return sol;
  }

  // The main solve did not land on a feasible point: certify feasibility or
  // throw with the family that cannot be satisfied.
  Phase1Problem elastic(A_, gram_, b, c0, g, eta, etabar, mu);
  VectorXd ex0, es0;
  elastic.initial_point(ex0, es0);
  IpmResult eres = run_mehrotra(elastic, ex0, es0, 150);
  const bool certified = eres.status == IpmStatus::Optimal ||
                         eres.status == IpmStatus::LooseOptimal;
  const double tau = eres.x[m];
  if (certified && tau > tol) {
    FamilyResiduals fr = family_residuals(A_, gram_, b, c0, g, eta, etabar, mu,
                                          eres.x.head(m));
    std::ostringstream msg;
    msg << "infeasible (" << constraint_family_name(fr.worst_family())
        << "): smallest uniform constraint relaxation is " << tau
        << ", above the feasibility tolerance " << tol;
    throw InfeasibleError(fr.worst_family(), msg.str());
  }

  // Feasible but the first attempt struggled: retry from a heavier start.
  main.initial_point(100.0, x0, s0);
  res = run_mehrotra(main, x0, s0, 200);
  if (res.status == IpmStatus::Optimal || res.status == IpmStatus::LooseOptimal) {
    LpSolution sol = extract(res);
    if (sol.max_violation <= tol) return sol;
  }
  throw std::runtime_error(
      "l1_constrained_lp: interior point iteration failed to converge");
}

LpSolution l1_constrained_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& g,
                             double eta, double etabar, double mu, double tol) {
  return L1ConstrainedLp(A).solve(g, eta, etabar, mu, tol);
}

}  // namespace grip
