#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sgeo/linalg.hpp"
#include "sgeo/simplex.hpp"

namespace sgeo {

enum class CorrelationFamily { exponential, gaussian, spherical, nugget, cosine_1d };

std::string_view to_string(CorrelationFamily family);
CorrelationFamily parse_family(std::string_view name);

/// Stationary isotropic correlation function with an optional nugget share:
/// (1 - nugget_fraction) rho_family(|h| / range) + nugget_fraction 1{h = 0}.
class CorrelationFunction {
 public:
  CorrelationFunction(CorrelationFamily family, double range, double nugget_fraction = 0.0);

  CorrelationFamily family() const { return family_; }
  double range() const { return range_; }
  double nugget_fraction() const { return nugget_fraction_; }

  double operator()(std::span<const double> lag) const;

  friend bool operator==(const CorrelationFunction&, const CorrelationFunction&) = default;

 private:
  CorrelationFamily family_;
  double range_;
  double nugget_fraction_;
};

double corr_eval(const CorrelationFunction& rho, std::span<const double> lag);

/// n x n matrix R_ij = rho(s_j - s_i).
Eigen::MatrixXd correlation_matrix(const CorrelationFunction& rho, const SiteSet& sites);

/// C_kl(h) = sigma_kl rho(h).
struct ProportionalModel {
  Eigen::MatrixXd sigma;
  CorrelationFunction rho;
};

struct LmcTerm {
  Eigen::MatrixXd sigma;
  CorrelationFunction rho;
};

/// Linear model of coregionalization: C(h) = sum_j sigma_j rho_j(h).
struct LmcModel {
  std::vector<LmcTerm> terms;
};

/// Multivariate covariance model. Construction checks shapes and symmetry;
/// definiteness is checked by validate_model() and build_block_matrix().
class CovModel {
 public:
  static CovModel proportional(Eigen::MatrixXd sigma, CorrelationFunction rho);
  static CovModel lmc(std::vector<LmcTerm> terms);

  std::size_t parts() const { return parts_; }
  bool is_proportional() const { return std::holds_alternative<ProportionalModel>(model_); }
  const std::variant<ProportionalModel, LmcModel>& variant() const { return model_; }

  /// p x p matrix C(h).
  Eigen::MatrixXd at(std::span<const double> lag) const;

 private:
  explicit CovModel(std::variant<ProportionalModel, LmcModel> model, std::size_t parts)
      : model_(std::move(model)), parts_(parts) {}

  std::variant<ProportionalModel, LmcModel> model_;
  std::size_t parts_;
};

/// np x np covariance in variable-major order: entry (k n + i, l n + j) is
/// C_kl(s_j - s_i).
class BlockCovMatrix {
 public:
  BlockCovMatrix(Eigen::MatrixXd entries, std::size_t n, std::size_t p);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  std::size_t sites() const { return n_; }
  std::size_t parts() const { return p_; }
  Eigen::MatrixXd block(std::size_t k, std::size_t l) const;
  double operator()(std::size_t k, std::size_t i, std::size_t l, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(k * n_ + i), static_cast<Eigen::Index>(l * n_ + j));
  }

 private:
  Eigen::MatrixXd entries_;
  std::size_t n_;
  std::size_t p_;
};

/// Assembles the block matrix; throws InvalidModelError when it is not
/// positive definite.
BlockCovMatrix build_block_matrix(const CovModel& model, const SiteSet& sites);

/// Assembly without the definiteness check.
Eigen::MatrixXd assemble_block_matrix(const CovModel& model, const SiteSet& sites);

struct TermDiagnostics {
  std::string name;
  CholeskyDiagnostics cholesky;
  double min_eigenvalue = 0.0;
  bool ok = false;
};

struct ModelValidityReport {
  bool valid = false;
  CholeskyDiagnostics block;
  std::vector<TermDiagnostics> terms;
  std::vector<std::string> issues;
};

ModelValidityReport validate_model(const CovModel& model, const SiteSet& sites);

}  // namespace sgeo
