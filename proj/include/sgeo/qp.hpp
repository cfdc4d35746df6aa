#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace sgeo {

/// Convex quadratic program
///   minimize  1/2 x^T H x + g^T x
///   subject to  Aeq x = beq,  Ain x >= cin
/// with H symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::MatrixXd Ain;
  Eigen::VectorXd cin;
};

/// Multipliers follow H x + g = Aeq^T nu + Ain^T alpha, alpha >= 0.
struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd nu;
  Eigen::VectorXd alpha;
  std::vector<std::size_t> working_set;  // sorted inequality indices held at equality
  std::size_t iterations = 0;
};

struct QpOptions {
  /// Multipliers above -dual_tol count as nonnegative (scaled by max(1, max H_ii)).
  double dual_tol = 1e-13;
  /// Steps with max-norm below this (scaled by max(1, |x|_max)) count as zero.
  double step_tol = 1e-12;
  /// 0 selects max(2^min(m, 20), 8 (n + m)).
  std::size_t max_iterations = 0;
};

/// Primal active-set method. `x0` must be feasible and `working_set` must be a
/// set of inequalities active at x0 whose rows, stacked under Aeq, are
/// linearly independent. Throws SolverError when the iteration cap is hit.
QpResult solve_qp(const QpProblem& problem, Eigen::VectorXd x0, std::vector<std::size_t> working_set,
                  const QpOptions& options = {});

/// Minimizer of the equality-constrained problem using the rows of Ain
/// listed in `active` as additional equalities. Returns x and the stacked
/// multipliers (equalities first, then the listed inequalities).
struct EqualityQpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
};
EqualityQpSolution solve_equality_qp(const QpProblem& problem, const std::vector<std::size_t>& active);

}  // namespace sgeo
