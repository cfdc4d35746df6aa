#include "sgeo/linalg.hpp"

#include <cmath>
#include <limits>

namespace sgeo {

CholeskyDiagnostics cholesky_diagnostics(const Eigen::MatrixXd& a) {
  CholeskyDiagnostics out;
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) return out;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  out.min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    out.min_pivot = std::min(out.min_pivot, pivot);
    if (!(pivot > 0.0)) {
      out.failed_at = static_cast<std::size_t>(j);
      return out;
    }
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
    }
  }
  out.success = true;
  return out;
}

double max_abs(const Eigen::MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace sgeo
