#pragma once

#include <optional>

#include <Eigen/Dense>

namespace sgeo {

/// Outcome of a plain (unpivoted) Cholesky factorization A = L L^T.
/// `min_pivot` is the smallest L_ii^2 reached; on failure `failed_at` is the
/// 0-based row where the pivot was not positive.
struct CholeskyDiagnostics {
  bool success = false;
  double min_pivot = 0.0;
  std::optional<std::size_t> failed_at;
};

CholeskyDiagnostics cholesky_diagnostics(const Eigen::MatrixXd& a);

double max_abs(const Eigen::MatrixXd& a);

/// Kronecker product a (x) b.
Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace sgeo
