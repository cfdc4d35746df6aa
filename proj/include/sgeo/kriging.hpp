#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sgeo/covariance.hpp"
#include "sgeo/simplex.hpp"

namespace sgeo {

/// Generalized least squares weights for the mean of one variable.
struct SingleKriging {
  Eigen::VectorXd lambda;
  double mu = 0.0;
  double variance = 0.0;
};

/// lambda = C^{-1} 1 / (1^T C^{-1} 1), mu = variance = 1 / (1^T C^{-1} 1).
/// Throws InvalidModelError when C is not positive definite.
SingleKriging krige_mean_single(const Eigen::MatrixXd& c);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;           // equality and inequality violation
  double dual = 0.0;             // max(0, -alpha_i)
  double complementarity = 0.0;  // max |alpha_i * slack_i|
  double max() const;
};

enum class WeightLayout {
  shared,    // one n-vector applied to every part
  stacked,   // np x p matrix Lambda in variable-major row order
  per_part,  // n x p matrix, column k weights the data of part k only
};

struct KrigingSolution {
  WeightLayout layout = WeightLayout::shared;
  std::size_t n = 0;
  std::size_t p = 0;
  Eigen::MatrixXd lambda;
  /// Lagrange multipliers: p x p for stacked cokriging, 1 x 1 for a shared
  /// vector, (p + 1) x 1 for per-part weights (p sum-to-one rows, then the
  /// estimate-sum row).
  Eigen::MatrixXd mu;
  std::optional<Eigen::VectorXd> alpha;
  std::vector<std::size_t> active_set;
  std::optional<Eigen::VectorXd> variance;
  KktResiduals kkt;
  std::optional<Eigen::VectorXd> estimates;

  /// Weight vector applied to the data of part `from` when estimating part `to`.
  Eigen::VectorXd weights(std::size_t from, std::size_t to) const;
  /// Lambda in the stacked np x p layout.
  Eigen::MatrixXd stacked() const;
};

/// Simultaneous cokriging of the p means: Lambda = C^{-1} J mu,
/// mu = (J^T C^{-1} J)^{-1}, J = I_p (x) 1_n.
KrigingSolution cokrige_means(const CovModel& model, const SiteSet& sites);
KrigingSolution cokrige_means(const BlockCovMatrix& c);

/// min lambda^T C lambda subject to 1^T lambda = 1, lambda >= 0.
/// Multipliers satisfy C lambda = mu 1 + alpha.
KrigingSolution nonneg_krige_mean(const Eigen::MatrixXd& c);

/// One nonnegative lambda shared by all parts, minimizing
/// sum_k lambda^T C_kk lambda.
KrigingSolution nonneg_cokrige_means(const CovModel& model, const SiteSet& sites);
KrigingSolution nonneg_cokrige_means(const BlockCovMatrix& c);

/// Per-part weights minimizing sum_k (lambda^k)^T C_kk lambda^k subject to
/// 1^T lambda^k = 1, sum_k (lambda^k)^T x^k = 1 and (lambda^k)^T x^k >= 0.
/// Cross-covariances do not enter the objective.
KrigingSolution walvoort_compositional_krige(const CovModel& model, const SiteSet& sites,
                                             const CompositionalDataset& ds);
KrigingSolution walvoort_compositional_krige(const BlockCovMatrix& c, const CompositionalDataset& ds);

struct WeightEquality {
  bool equal = true;
  double max_deviation = 0.0;
};

/// Compares the own-part weight vectors pairwise and checks that every
/// cross-part block vanishes.
WeightEquality weights_equal_across_variables(const KrigingSolution& sol, double tol);

/// max |J^T Lambda - I_p|.
double unbiasedness_residual(const KrigingSolution& sol);

/// Estimated means of the p parts from the data in `ds`.
Eigen::VectorXd apply_weights(const KrigingSolution& sol, const CompositionalDataset& ds);

/// True when every weight is >= -tol.
bool weights_nonnegative(const KrigingSolution& sol, double tol = 0.0);

}  // namespace sgeo
