#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double pi() { return std::acos(-1.0); }

/// Orthonormal ilr basis by Gram-Schmidt on the contrasts
/// e_1 + ... + e_i - i e_{i+1}, applied to centred logs.
inline std::vector<double> ilr(const std::vector<double>& x) {
  const int p = static_cast<int>(x.size());
  Eigen::VectorXd lx(p);
  for (int k = 0; k < p; ++k) lx(k) = std::log(x[static_cast<std::size_t>(k)]);
  lx.array() -= lx.mean();
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> u;
  for (int i = 1; i < p; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    v.head(i).setOnes();
    v(i) = -i;
    for (const auto& b : basis) v -= b.dot(v) * b;
    v.normalize();
    basis.push_back(v);
    u.push_back(v.dot(lx));
  }
  return u;
}

inline std::vector<double> geometric_mean(const std::vector<std::vector<double>>& rows) {
  const std::size_t p = rows.front().size();
  std::vector<double> g(p, 1.0);
  for (std::size_t k = 0; k < p; ++k) {
    for (const auto& r : rows) g[k] *= r[k];
    g[k] = std::pow(g[k], 1.0 / static_cast<double>(rows.size()));
  }
  double s = 0.0;
  for (double v : g) s += v;
  for (double& v : g) v /= s;
  return g;
}

/// Kriging of the mean from the bordered system [C -1; 1^T 0][lambda; mu] = [0; 1].
struct Bordered {
  Eigen::VectorXd lambda;
  double mu = 0.0;
};
inline Bordered bordered_kriging(const Eigen::MatrixXd& c) {
  const auto n = c.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = c;
  a.topRightCorner(n, 1).setConstant(-1.0);
  a.bottomLeftCorner(1, n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  const Eigen::VectorXd sol = a.fullPivLu().solve(b);
  return {sol.head(n), sol(n)};
}

/// Cokriging from the full bordered system [C -J; J^T 0][Lambda; mu] = [0; I].
struct BorderedCo {
  Eigen::MatrixXd lambda;  // np x p
  Eigen::MatrixXd mu;      // p x p
};
inline BorderedCo bordered_cokriging(const Eigen::MatrixXd& c, int n, int p) {
  const int m = n * p;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, p);
  for (int k = 0; k < p; ++k) j.block(k * n, k, n, 1).setOnes();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + p, m + p);
  a.topLeftCorner(m, m) = c;
  a.topRightCorner(m, p) = -j;
  a.bottomLeftCorner(p, m) = j.transpose();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m + p, p);
  b.bottomRows(p).setIdentity();
  const Eigen::MatrixXd sol = a.fullPivLu().solve(b);
  return {sol.topRows(m), sol.bottomRows(p)};
}

/// min lambda^T C lambda over the probability simplex by trying every
/// support set: each candidate solves the bordered system restricted to its
/// support and is kept when all weights are nonnegative.
struct Enumerated {
  Eigen::VectorXd lambda;
  double objective = std::numeric_limits<double>::infinity();
};
inline Enumerated enumerate_nonneg(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  Enumerated best;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) sub(a, b) = c(idx[a], idx[b]);
    }
    const auto part = bordered_kriging(sub);
    if (part.lambda.minCoeff() < -1e-14) continue;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < m; ++a) full(idx[a]) = std::max(0.0, part.lambda(a));
    full /= full.sum();
    const double obj = full.dot(c * full);
    if (obj < best.objective) {
      best.objective = obj;
      best.lambda = full;
    }
  }
  return best;
}

inline Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        for (Eigen::Index s = 0; s < b.cols(); ++s) out(i * b.rows() + r, j * b.cols() + s) = a(i, j) * b(r, s);
      }
    }
  }
  return out;
}

/// Random symmetric positive definite matrix A A^T / n + ridge I.
inline Eigen::MatrixXd random_spd(std::mt19937_64& eng, int n, double ridge) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = z(eng);
  }
  Eigen::MatrixXd s = a * a.transpose() / n;
  s.diagonal().array() += ridge;
  return 0.5 * (s + s.transpose());
}

inline std::vector<double> random_composition(std::mt19937_64& eng, std::size_t p, double floor = 1e-3) {
  std::exponential_distribution<double> e;
  std::vector<double> x(p);
  double s = 0.0;
  for (auto& v : x) {
    v = e(eng) + floor;
    s += v;
  }
  for (auto& v : x) v /= s;
  return x;
}

}  // namespace oracle
