#include "sgeo/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgeo/error.hpp"
#include "sgeo/qp.hpp"

namespace sgeo {

namespace {

constexpr double kUnconstrainedSlack = 1e-12;

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& c, const char* what) {
  if (c.rows() == 0 || c.rows() != c.cols()) throw DomainError(std::string(what) + " must be a non-empty square matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    throw InvalidModelError(std::string(what) + " is singular or not positive definite");
  }
  return llt;
}

Eigen::MatrixXd ones_selector(std::size_t n, std::size_t p) {
  return kronecker(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)),
                   Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1));
}

// Residuals of C lambda = mu 1 + alpha, 1^T lambda = 1, lambda >= 0, alpha >= 0.
KktResiduals shared_kkt(const Eigen::MatrixXd& c, const Eigen::VectorXd& lambda, double mu,
                        const Eigen::VectorXd& alpha) {
  KktResiduals r;
  const Eigen::VectorXd stat = c * lambda - Eigen::VectorXd::Constant(lambda.size(), mu) - alpha;
  r.stationarity = stat.cwiseAbs().maxCoeff();
  r.primal = std::max(std::abs(lambda.sum() - 1.0), std::max(0.0, -lambda.minCoeff()));
  r.dual = std::max(0.0, -alpha.minCoeff());
  r.complementarity = lambda.cwiseProduct(alpha).cwiseAbs().maxCoeff();
  return r;
}

Eigen::MatrixXd own_block_sum(const BlockCovMatrix& c) {
  Eigen::MatrixXd s = c.block(0, 0);
  for (std::size_t k = 1; k < c.parts(); ++k) s += c.block(k, k);
  return s;
}

}  // namespace

double KktResiduals::max() const { return std::max({stationarity, primal, dual, complementarity}); }

Eigen::VectorXd KrigingSolution::weights(std::size_t from, std::size_t to) const {
  const auto nn = static_cast<Eigen::Index>(n);
  switch (layout) {
    case WeightLayout::shared:
      return from == to ? Eigen::VectorXd(lambda.col(0)) : Eigen::VectorXd::Zero(nn);
    case WeightLayout::stacked:
      return lambda.block(static_cast<Eigen::Index>(from) * nn, static_cast<Eigen::Index>(to), nn, 1);
    case WeightLayout::per_part:
      return from == to ? Eigen::VectorXd(lambda.col(static_cast<Eigen::Index>(to))) : Eigen::VectorXd::Zero(nn);
  }
  return {};
}

Eigen::MatrixXd KrigingSolution::stacked() const {
  if (layout == WeightLayout::stacked) return lambda;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * p), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) {
    out.block(static_cast<Eigen::Index>(k * n), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n), 1) =
        weights(k, k);
  }
  return out;
}

SingleKriging krige_mean_single(const Eigen::MatrixXd& c) {
  const auto llt = factor_spd(c, "covariance matrix");
  const Eigen::VectorXd y = llt.solve(Eigen::VectorXd::Ones(c.rows()));
  const double s = y.sum();
  SingleKriging out;
  out.lambda = y / s;
  out.mu = 1.0 / s;
  out.variance = out.mu;
  return out;
}

KrigingSolution cokrige_means(const BlockCovMatrix& c) {
  const std::size_t n = c.sites();
  const std::size_t p = c.parts();
  const auto llt = factor_spd(c.matrix(), "block covariance matrix");
  const Eigen::MatrixXd j = ones_selector(n, p);
  const Eigen::MatrixXd y = llt.solve(j);
  Eigen::MatrixXd m = j.transpose() * y;
  m = 0.5 * (m + m.transpose()).eval();
  const auto pp = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd mu = factor_spd(m, "J^T C^-1 J").solve(Eigen::MatrixXd::Identity(pp, pp));
  mu = 0.5 * (mu + mu.transpose()).eval();

  KrigingSolution sol;
  sol.layout = WeightLayout::stacked;
  sol.n = n;
  sol.p = p;
  sol.lambda = y * mu;
  sol.mu = mu;
  sol.variance = mu.diagonal();
  sol.kkt.stationarity = max_abs(c.matrix() * sol.lambda - j * mu);
  sol.kkt.primal = unbiasedness_residual(sol);
  return sol;
}

KrigingSolution cokrige_means(const CovModel& model, const SiteSet& sites) {
  return cokrige_means(build_block_matrix(model, sites));
}

KrigingSolution nonneg_krige_mean(const Eigen::MatrixXd& c) {
  const auto single = krige_mean_single(c);
  const Eigen::Index n = c.rows();
  KrigingSolution sol;
  sol.layout = WeightLayout::shared;
  sol.n = static_cast<std::size_t>(n);
  sol.p = 1;
  sol.mu = Eigen::MatrixXd::Constant(1, 1, single.mu);

  if (single.lambda.minCoeff() >= -kUnconstrainedSlack) {
    sol.lambda = single.lambda;
    sol.alpha = Eigen::VectorXd::Zero(n);
    sol.variance = Eigen::VectorXd::Constant(1, single.variance);
    sol.kkt = shared_kkt(c, single.lambda, single.mu, *sol.alpha);
    return sol;
  }

  QpProblem qp{c,
               Eigen::VectorXd::Zero(n),
               Eigen::MatrixXd::Ones(1, n),
               Eigen::VectorXd::Ones(1),
               Eigen::MatrixXd::Identity(n, n),
               Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd x0 = single.lambda.cwiseMax(0.0);
  x0 /= x0.sum();
  std::vector<std::size_t> start;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (single.lambda(i) < 0.0) start.push_back(static_cast<std::size_t>(i));
  }
  const auto res = solve_qp(qp, std::move(x0), std::move(start));

  // Clean solve of the reduced system on the free set.
  std::vector<bool> held(static_cast<std::size_t>(n), false);
  for (auto i : res.working_set) held[i] = true;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!held[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd cff(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = 0; b < nf; ++b) cff(a, b) = c(free[a], free[b]);
  }
  const auto reduced = krige_mean_single(cff);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < nf; ++a) lambda(free[a]) = reduced.lambda(a);
  const double mu = reduced.mu;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd grad = c * lambda;
  const double report_tol = 1e-12 * std::max(1.0, c.diagonal().maxCoeff());
  for (auto i : res.working_set) {
    const auto ii = static_cast<Eigen::Index>(i);
    alpha(ii) = grad(ii) - mu;
    if (alpha(ii) > report_tol) sol.active_set.push_back(i);
  }
  sol.lambda = lambda;
  sol.mu(0, 0) = mu;
  sol.alpha = alpha;
  sol.variance = Eigen::VectorXd::Constant(1, lambda.dot(grad));
  sol.kkt = shared_kkt(c, lambda, mu, alpha);
  return sol;
}

KrigingSolution nonneg_cokrige_means(const BlockCovMatrix& c) {
  auto sol = nonneg_krige_mean(own_block_sum(c));
  sol.p = c.parts();
  Eigen::VectorXd var(static_cast<Eigen::Index>(c.parts()));
  const Eigen::VectorXd lambda = sol.lambda.col(0);
  for (std::size_t k = 0; k < c.parts(); ++k) {
    var(static_cast<Eigen::Index>(k)) = lambda.dot(c.block(k, k) * lambda);
  }
  sol.variance = var;
  return sol;
}

KrigingSolution nonneg_cokrige_means(const CovModel& model, const SiteSet& sites) {
  return nonneg_cokrige_means(build_block_matrix(model, sites));
}

KrigingSolution walvoort_compositional_krige(const BlockCovMatrix& c, const CompositionalDataset& ds) {
  const std::size_t n = c.sites();
  const std::size_t p = c.parts();
  if (ds.size() != n || ds.parts() != p) {
    std::ostringstream msg;
    msg << "dataset is " << ds.size() << " x " << ds.parts() << " but the model expects " << n << " x " << p;
    throw DomainError(msg.str());
  }
  const auto nn = static_cast<Eigen::Index>(n);
  const auto pp = static_cast<Eigen::Index>(p);
  const Eigen::Index dim = nn * pp;

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(dim, dim);
  qp.g = Eigen::VectorXd::Zero(dim);
  qp.Aeq = Eigen::MatrixXd::Zero(pp + 1, dim);
  qp.beq = Eigen::VectorXd::Ones(pp + 1);
  qp.Ain = Eigen::MatrixXd::Zero(pp, dim);
  qp.cin = Eigen::VectorXd::Zero(pp);
  for (Eigen::Index k = 0; k < pp; ++k) {
    qp.H.block(k * nn, k * nn, nn, nn) = c.block(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    const auto col = ds.column(static_cast<std::size_t>(k));
    const Eigen::Map<const Eigen::VectorXd> xk(col.data(), nn);
    qp.Aeq.block(k, k * nn, 1, nn).setOnes();
    qp.Aeq.block(pp, k * nn, 1, nn) = xk.transpose();
    qp.Ain.block(k, k * nn, 1, nn) = xk.transpose();
  }
  // All weight on the first site is feasible: the estimates are its parts.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index k = 0; k < pp; ++k) z0(k * nn) = 1.0;
  const auto res = solve_qp(qp, std::move(z0), {});

  KrigingSolution sol;
  sol.layout = WeightLayout::per_part;
  sol.n = n;
  sol.p = p;
  sol.lambda = Eigen::Map<const Eigen::MatrixXd>(res.x.data(), nn, pp);
  sol.mu = res.nu;
  sol.alpha = res.alpha;
  const Eigen::VectorXd est = qp.Ain * res.x;
  sol.estimates = est;
  Eigen::VectorXd var(pp);
  for (Eigen::Index k = 0; k < pp; ++k) {
    const Eigen::VectorXd l = sol.lambda.col(k);
    var(k) = l.dot(qp.H.block(k * nn, k * nn, nn, nn) * l);
  }
  sol.variance = var;
  const double report_tol = 1e-12 * std::max(1.0, qp.H.diagonal().maxCoeff());
  for (auto k : res.working_set) {
    if (res.alpha(static_cast<Eigen::Index>(k)) > report_tol) sol.active_set.push_back(k);
  }
  sol.kkt.stationarity = (qp.H * res.x - qp.Aeq.transpose() * res.nu - qp.Ain.transpose() * res.alpha).cwiseAbs().maxCoeff();
  sol.kkt.primal = std::max((qp.Aeq * res.x - qp.beq).cwiseAbs().maxCoeff(), std::max(0.0, -est.minCoeff()));
  sol.kkt.dual = std::max(0.0, -res.alpha.minCoeff());
  sol.kkt.complementarity = est.cwiseProduct(res.alpha).cwiseAbs().maxCoeff();
  return sol;
}

KrigingSolution walvoort_compositional_krige(const CovModel& model, const SiteSet& sites,
                                             const CompositionalDataset& ds) {
  return walvoort_compositional_krige(build_block_matrix(model, sites), ds);
}

WeightEquality weights_equal_across_variables(const KrigingSolution& sol, double tol) {
  WeightEquality out;
  for (std::size_t k = 0; k < sol.p; ++k) {
    const Eigen::VectorXd own = sol.weights(k, k);
    for (std::size_t l = 0; l < sol.p; ++l) {
      if (l == k) continue;
      out.max_deviation = std::max(out.max_deviation, sol.weights(l, k).cwiseAbs().maxCoeff());
      if (l > k) out.max_deviation = std::max(out.max_deviation, (own - sol.weights(l, l)).cwiseAbs().maxCoeff());
    }
  }
  out.equal = out.max_deviation <= tol;
  return out;
}

double unbiasedness_residual(const KrigingSolution& sol) {
  double r = 0.0;
  for (std::size_t k = 0; k < sol.p; ++k) {
    for (std::size_t l = 0; l < sol.p; ++l) {
      r = std::max(r, std::abs(sol.weights(l, k).sum() - (l == k ? 1.0 : 0.0)));
    }
  }
  return r;
}

Eigen::VectorXd apply_weights(const KrigingSolution& sol, const CompositionalDataset& ds) {
  if (ds.size() != sol.n) throw DomainError("dataset size does not match the kriging weights");
  const std::size_t p = ds.parts();
  if (sol.layout != WeightLayout::shared && p != sol.p) {
    throw DomainError("dataset part count does not match the kriging weights");
  }
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t to = 0; to < p; ++to) {
    for (std::size_t from = 0; from < p; ++from) {
      if (sol.layout != WeightLayout::stacked && from != to) continue;
      const auto col = ds.column(from);
      const auto w = sol.layout == WeightLayout::shared ? Eigen::VectorXd(sol.lambda.col(0)) : sol.weights(from, to);
      m(static_cast<Eigen::Index>(to)) += w.dot(Eigen::Map<const Eigen::VectorXd>(col.data(), w.size()));
    }
  }
  return m;
}

bool weights_nonnegative(const KrigingSolution& sol, double tol) { return sol.lambda.minCoeff() >= -tol; }

}  // namespace sgeo
