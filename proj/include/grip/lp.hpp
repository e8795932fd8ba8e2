#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace grip {

// The three constraint families of the l1 programs: the gradient sup-norm
// cap, the inner-product lower bound, and the residual sup-norm cap.
enum class ConstraintFamily { GradientBound, InnerProduct, ResidualBound };

const char* constraint_family_name(ConstraintFamily family);

// Raised when a program has no feasible point. Carries the family whose
// constraints cannot be met so callers can suggest a concrete remedy.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(ConstraintFamily family, const std::string& message)
      : std::runtime_error(message), family_(family) {}
  ConstraintFamily family() const { return family_; }

 private:
  ConstraintFamily family_;
};

struct LpSolution {
  Eigen::VectorXd xi;
  double objective = 0.0;  // l1 norm of xi
  int iterations = 0;
  // Signed worst constraint residual at the solution; <= 0 means strictly
  // feasible on every family.
  double max_violation = 0.0;
};

// Minimizes ||xi||_1 subject to
//   ||A^T (g - A xi)||_inf / n <= eta
//   g^T (g - A xi) / n         >= etabar
//   ||g - A xi||_inf           <= mu
// The absolute values are removed with auxiliary bound variables and the
// resulting linear program is solved with a primal-dual interior point
// method. The Gram matrix A^T A / n is computed once per kernel, so repeated
// solves against one design share it.
class L1ConstrainedLp {
 public:
  explicit L1ConstrainedLp(Eigen::MatrixXd A);

  // tol is the feasibility tolerance applied to the constraint residuals as
  // written above. Throws InfeasibleError when no point satisfies them.
  LpSolution solve(const Eigen::VectorXd& g, double eta, double etabar,
                   double mu, double tol = 1e-7) const;

  const Eigen::MatrixXd& design() const { return A_; }

 private:
  Eigen::MatrixXd A_;     // n x m
  Eigen::MatrixXd gram_;  // A^T A / n
};

// One-shot wrapper over the kernel.
LpSolution l1_constrained_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& g,
                             double eta, double etabar, double mu,
                             double tol = 1e-7);

}  // namespace grip
