#include "sgeo/covariance.hpp"

#include <cmath>
#include <sstream>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const std::string& name) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw DomainError(name + " must be a non-empty square matrix");
  if (!m.allFinite()) throw DomainError(name + " has non-finite entries");
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.transpose()) > 1e-12 * scale) throw DomainError(name + " is not symmetric");
}

std::string term_name(std::size_t j) { return "sigma_" + std::to_string(j + 1); }

}  // namespace

std::string_view to_string(CorrelationFamily family) {
  switch (family) {
    case CorrelationFamily::exponential: return "exponential";
    case CorrelationFamily::gaussian: return "gaussian";
    case CorrelationFamily::spherical: return "spherical";
    case CorrelationFamily::nugget: return "nugget";
    case CorrelationFamily::cosine_1d: return "cosine-1d";
  }
  return "?";
}

CorrelationFamily parse_family(std::string_view name) {
  for (auto f : {CorrelationFamily::exponential, CorrelationFamily::gaussian, CorrelationFamily::spherical,
                 CorrelationFamily::nugget, CorrelationFamily::cosine_1d}) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown correlation family '" + std::string(name) + "'");
}

CorrelationFunction::CorrelationFunction(CorrelationFamily family, double range, double nugget_fraction)
    : family_(family), range_(range), nugget_fraction_(nugget_fraction) {
  if (!(std::isfinite(range_) && range_ > 0.0)) throw DomainError("correlation range must be positive");
  if (!(nugget_fraction_ >= 0.0 && nugget_fraction_ <= 1.0)) {
    throw DomainError("nugget fraction must lie in [0, 1]");
  }
}

double CorrelationFunction::operator()(std::span<const double> lag) const {
  if (family_ == CorrelationFamily::cosine_1d && lag.size() > 1) {
    throw DomainError("cosine-1d correlation is only valid in one dimension");
  }
  double h2 = 0.0;
  for (double v : lag) h2 += v * v;
  if (h2 == 0.0) return 1.0;
  const double t = std::sqrt(h2) / range_;
  double base = 0.0;
  switch (family_) {
    case CorrelationFamily::exponential: base = std::exp(-t); break;
    case CorrelationFamily::gaussian: base = std::exp(-t * t); break;
    case CorrelationFamily::spherical: base = t < 1.0 ? 1.0 - 1.5 * t + 0.5 * t * t * t : 0.0; break;
    case CorrelationFamily::nugget: base = 0.0; break;
    case CorrelationFamily::cosine_1d: base = std::cos(t); break;
  }
  return (1.0 - nugget_fraction_) * base;
}

double corr_eval(const CorrelationFunction& rho, std::span<const double> lag) { return rho(lag); }

Eigen::MatrixXd correlation_matrix(const CorrelationFunction& rho, const SiteSet& sites) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  const auto& s = sites.coords();
  Eigen::MatrixXd r(n, n);
  Eigen::VectorXd lag(s.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      lag = (s.row(j) - s.row(i)).transpose();
      r(i, j) = r(j, i) = rho(std::span<const double>(lag.data(), static_cast<std::size_t>(lag.size())));
    }
  }
  return r;
}

CovModel CovModel::proportional(Eigen::MatrixXd sigma, CorrelationFunction rho) {
  require_symmetric(sigma, "sigma");
  const auto p = static_cast<std::size_t>(sigma.rows());
  return CovModel(ProportionalModel{std::move(sigma), rho}, p);
}

CovModel CovModel::lmc(std::vector<LmcTerm> terms) {
  if (terms.empty()) throw DomainError("linear model of coregionalization needs at least one term");
  const auto p = terms.front().sigma.rows();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    require_symmetric(terms[j].sigma, term_name(j));
    if (terms[j].sigma.rows() != p) throw DomainError("coregionalization matrices differ in size");
  }
  return CovModel(LmcModel{std::move(terms)}, static_cast<std::size_t>(p));
}

Eigen::MatrixXd CovModel::at(std::span<const double> lag) const {
  if (const auto* prop = std::get_if<ProportionalModel>(&model_)) return prop->sigma * prop->rho(lag);
  const auto& lmc = std::get<LmcModel>(model_);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(parts_), static_cast<Eigen::Index>(parts_));
  for (const auto& t : lmc.terms) c += t.sigma * t.rho(lag);
  return c;
}

BlockCovMatrix::BlockCovMatrix(Eigen::MatrixXd entries, std::size_t n, std::size_t p)
    : entries_(std::move(entries)), n_(n), p_(p) {
  if (entries_.rows() != static_cast<Eigen::Index>(n * p) || entries_.cols() != entries_.rows()) {
    throw DomainError("block covariance matrix has the wrong shape");
  }
}

Eigen::MatrixXd BlockCovMatrix::block(std::size_t k, std::size_t l) const {
  const auto n = static_cast<Eigen::Index>(n_);
  return entries_.block(static_cast<Eigen::Index>(k) * n, static_cast<Eigen::Index>(l) * n, n, n);
}

Eigen::MatrixXd assemble_block_matrix(const CovModel& model, const SiteSet& sites) {
  if (const auto* prop = std::get_if<ProportionalModel>(&model.variant())) {
    return kronecker(prop->sigma, correlation_matrix(prop->rho, sites));
  }
  const auto& lmc = std::get<LmcModel>(model.variant());
  const auto np = static_cast<Eigen::Index>(model.parts() * sites.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(np, np);
  for (const auto& t : lmc.terms) c += kronecker(t.sigma, correlation_matrix(t.rho, sites));
  return c;
}

BlockCovMatrix build_block_matrix(const CovModel& model, const SiteSet& sites) {
  Eigen::MatrixXd c = assemble_block_matrix(model, sites);
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    const auto diag = cholesky_diagnostics(c);
    std::ostringstream msg;
    msg << "block covariance matrix is not positive definite";
    if (diag.failed_at) msg << " (Cholesky fails at row " << *diag.failed_at + 1 << ")";
    throw InvalidModelError(msg.str());
  }
  return BlockCovMatrix(std::move(c), sites.size(), model.parts());
}

ModelValidityReport validate_model(const CovModel& model, const SiteSet& sites) {
  ModelValidityReport report;
  bool terms_ok = true;
  auto describe_term = [](const Eigen::MatrixXd& sigma, std::string name) {
    TermDiagnostics t;
    t.name = std::move(name);
    t.cholesky = cholesky_diagnostics(sigma);
    t.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return t;
  };
  if (const auto* prop = std::get_if<ProportionalModel>(&model.variant())) {
    auto t = describe_term(prop->sigma, "sigma");
    t.ok = t.cholesky.success;
    if (!t.ok) report.issues.push_back("sigma is not positive definite");
    terms_ok = t.ok;
    report.terms.push_back(std::move(t));
  } else {
    const auto& lmc = std::get<LmcModel>(model.variant());
    for (std::size_t j = 0; j < lmc.terms.size(); ++j) {
      auto t = describe_term(lmc.terms[j].sigma, term_name(j));
      t.ok = t.min_eigenvalue >= -1e-10;
      if (!t.ok) report.issues.push_back(t.name + " is not positive semidefinite");
      terms_ok = terms_ok && t.ok;
      report.terms.push_back(std::move(t));
    }
  }
  bool block_ok = false;
  try {
    report.block = cholesky_diagnostics(assemble_block_matrix(model, sites));
    block_ok = report.block.success;
    if (!block_ok) report.issues.push_back("assembled block covariance matrix is not positive definite");
  } catch (const DomainError& e) {
    report.issues.push_back(e.what());
  }
  report.valid = terms_ok && block_ok;
  return report;
}

}  // namespace sgeo
