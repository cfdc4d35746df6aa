#include "sgeo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

Eigen::MatrixXd stack_rows(const QpProblem& qp, const std::vector<std::size_t>& active, Eigen::VectorXd& rhs) {
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index me = qp.Aeq.rows();
  const auto ma = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd a(me + ma, n);
  rhs.resize(me + ma);
  if (me > 0) {
    a.topRows(me) = qp.Aeq;
    rhs.head(me) = qp.beq;
  }
  for (Eigen::Index r = 0; r < ma; ++r) {
    const auto i = static_cast<Eigen::Index>(active[static_cast<std::size_t>(r)]);
    a.row(me + r) = qp.Ain.row(i);
    rhs(me + r) = qp.cin(i);
  }
  return a;
}

EqualityQpSolution solve_with(const QpProblem& qp, const Eigen::LLT<Eigen::MatrixXd>& h,
                              const std::vector<std::size_t>& active) {
  Eigen::VectorXd rhs;
  const Eigen::MatrixXd a = stack_rows(qp, active, rhs);
  const Eigen::VectorXd hg = h.solve(qp.g);
  EqualityQpSolution out;
  if (a.rows() == 0) {
    out.x = -hg;
    out.multipliers.resize(0);
    return out;
  }
  const Eigen::MatrixXd hat = h.solve(a.transpose());
  const Eigen::MatrixXd schur = a * hat;
  const Eigen::VectorXd b = rhs + a * hg;
  Eigen::LLT<Eigen::MatrixXd> s(schur);
  if (s.info() == Eigen::Success) {
    out.multipliers = s.solve(b);
  } else {
    out.multipliers = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(schur).solve(b);
  }
  out.x = hat * out.multipliers - hg;
  return out;
}

void check_shapes(const QpProblem& qp) {
  const Eigen::Index n = qp.H.rows();
  if (n == 0 || qp.H.cols() != n || qp.g.size() != n) throw DomainError("qp: objective has inconsistent shape");
  if ((qp.Aeq.rows() > 0 && qp.Aeq.cols() != n) || qp.beq.size() != qp.Aeq.rows()) {
    throw DomainError("qp: equality constraints have inconsistent shape");
  }
  if ((qp.Ain.rows() > 0 && qp.Ain.cols() != n) || qp.cin.size() != qp.Ain.rows()) {
    throw DomainError("qp: inequality constraints have inconsistent shape");
  }
}

Eigen::LLT<Eigen::MatrixXd> factor(const QpProblem& qp) {
  Eigen::LLT<Eigen::MatrixXd> h(qp.H);
  if (h.info() != Eigen::Success) throw DomainError("qp: Hessian is not positive definite");
  return h;
}

}  // namespace

EqualityQpSolution solve_equality_qp(const QpProblem& problem, const std::vector<std::size_t>& active) {
  check_shapes(problem);
  return solve_with(problem, factor(problem), active);
}

QpResult solve_qp(const QpProblem& qp, Eigen::VectorXd x, std::vector<std::size_t> work, const QpOptions& options) {
  check_shapes(qp);
  const auto h = factor(qp);
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index me = qp.Aeq.rows();
  const Eigen::Index mi = qp.Ain.rows();
  if (x.size() != n) throw DomainError("qp: starting point has the wrong size");
  std::sort(work.begin(), work.end());

  const double dual_tol = options.dual_tol * std::max(1.0, qp.H.diagonal().maxCoeff());
  std::size_t cap = options.max_iterations;
  if (cap == 0) {
    const auto shift = std::min<Eigen::Index>(mi, 20);
    cap = std::max<std::size_t>(std::size_t{1} << shift, 8 * static_cast<std::size_t>(n + mi));
  }

  std::vector<bool> in_work(static_cast<std::size_t>(mi), false);
  for (auto i : work) in_work[i] = true;

  for (std::size_t iter = 1; iter <= cap; ++iter) {
    const auto sub = solve_with(qp, h, work);
    const Eigen::VectorXd step = sub.x - x;
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (step.cwiseAbs().maxCoeff() <= options.step_tol * scale) {
      // Stationary on the working set: check the inequality multipliers.
      std::size_t drop = work.size();
      double most_negative = -dual_tol;
      for (std::size_t r = 0; r < work.size(); ++r) {
        const double a = sub.multipliers(me + static_cast<Eigen::Index>(r));
        if (a < most_negative) {
          most_negative = a;
          drop = r;
        }
      }
      if (drop == work.size()) {
        QpResult out;
        out.x = sub.x;
        out.nu = sub.multipliers.head(me);
        out.alpha = Eigen::VectorXd::Zero(mi);
        for (std::size_t r = 0; r < work.size(); ++r) {
          out.alpha(static_cast<Eigen::Index>(work[r])) = sub.multipliers(me + static_cast<Eigen::Index>(r));
        }
        out.working_set = std::move(work);
        out.iterations = iter;
        return out;
      }
      in_work[work[drop]] = false;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(drop));
      continue;
    }
    // Ratio test over inequalities outside the working set.
    double t = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (in_work[static_cast<std::size_t>(i)]) continue;
      const double slope = qp.Ain.row(i).dot(step);
      if (slope >= 0.0) continue;
      const double ti = std::max(0.0, (qp.cin(i) - qp.Ain.row(i).dot(x)) / slope);
      if (ti < t) {
        t = ti;
        blocking = i;
      }
    }
    x += t * step;
    if (blocking >= 0) {
      in_work[static_cast<std::size_t>(blocking)] = true;
      work.insert(std::upper_bound(work.begin(), work.end(), static_cast<std::size_t>(blocking)),
                  static_cast<std::size_t>(blocking));
    }
  }
  throw SolverError("qp: active-set iteration cap reached", std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace sgeo
