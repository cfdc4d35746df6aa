#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sgeo/error.hpp"
#include "sgeo/qp.hpp"

using namespace sgeo;

namespace {

// Tries every subset of inequalities as equalities, solving the KKT system
// directly, and keeps the feasible point with the lowest objective.
Eigen::VectorXd brute_force(const QpProblem& q) {
  const int n = static_cast<int>(q.H.rows());
  const int me = static_cast<int>(q.Aeq.rows());
  const int mi = static_cast<int>(q.Ain.rows());
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < mi; ++i) {
      if (mask & (1u << i)) act.push_back(i);
    }
    const int m = me + static_cast<int>(act.size());
    if (m > n) continue;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    a.topRows(me) = q.Aeq;
    b.head(me) = q.beq;
    for (std::size_t r = 0; r < act.size(); ++r) {
      a.row(me + static_cast<int>(r)) = q.Ain.row(act[r]);
      b(me + static_cast<int>(r)) = q.cin(act[r]);
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + m, n + m);
    k.topLeftCorner(n, n) = q.H;
    k.topRightCorner(n, m) = a.transpose();
    k.bottomLeftCorner(m, n) = a;
    Eigen::VectorXd rhs(n + m);
    rhs << -q.g, b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (lu.rank() < n + m) continue;
    const Eigen::VectorXd x = lu.solve(rhs).head(n);
    if (mi > 0 && (q.Ain * x - q.cin).minCoeff() < -1e-12) continue;
    const double obj = 0.5 * x.dot(q.H * x) + q.g.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

QpProblem simplex_problem(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  const auto n = h.rows();
  QpProblem q;
  q.H = h;
  q.g = g;
  q.Aeq = Eigen::MatrixXd::Ones(1, n);
  q.beq = Eigen::VectorXd::Ones(1);
  q.Ain = Eigen::MatrixXd::Identity(n, n);
  q.cin = Eigen::VectorXd::Zero(n);
  return q;
}

}  // namespace

TEST_CASE("equality-constrained minimizer") {
  Eigen::MatrixXd h(2, 2);
  h << 2.0, 0.0, 0.0, 2.0;
  auto q = simplex_problem(h, Eigen::VectorXd::Zero(2));
  const auto sol = solve_equality_qp(q, {});
  CHECK((sol.x - Eigen::Vector2d(0.5, 0.5)).cwiseAbs().maxCoeff() <= 1e-15);
  // H x = nu 1 gives nu = 1.
  CHECK(std::abs(sol.multipliers(0) - 1.0) <= 1e-15);
  const auto pinned = solve_equality_qp(q, {0});
  CHECK((pinned.x - Eigen::Vector2d(0.0, 1.0)).cwiseAbs().maxCoeff() <= 1e-15);
  REQUIRE(pinned.multipliers.size() == 2);
  CHECK(std::abs(pinned.multipliers(1) + 2.0) <= 1e-14);
}

TEST_CASE("active-set solver matches enumeration") {
  std::mt19937_64 eng(51);
  std::normal_distribution<double> z;
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 7;
    const auto h = oracle::random_spd(eng, n, 1e-2);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = z(eng);
    const auto q = simplex_problem(h, g);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(n, 1.0 / n);
    const auto res = solve_qp(q, x0, {});
    const auto want = brute_force(q);
    REQUIRE((res.x - want).cwiseAbs().maxCoeff() <= 1e-8);
    // Multiplier convention: H x + g = Aeq^T nu + Ain^T alpha.
    const Eigen::VectorXd stat = h * res.x + g - q.Aeq.transpose() * res.nu - q.Ain.transpose() * res.alpha;
    REQUIRE(stat.cwiseAbs().maxCoeff() <= 1e-9);
    REQUIRE(res.alpha.minCoeff() >= -1e-12);
    for (int i = 0; i < n; ++i) REQUIRE(std::abs(res.alpha(i) * res.x(i)) <= 1e-10);
    for (std::size_t w : res.working_set) REQUIRE(std::abs(res.x(static_cast<Eigen::Index>(w))) <= 1e-12);
  }
}

TEST_CASE("general inequalities") {
  // minimize (x - 2)^2 + (y - 1)^2 with x + y <= 2 and x >= 0, y >= 0.
  QpProblem q;
  q.H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  q.g = Eigen::Vector2d(-4.0, -2.0);
  q.Aeq = Eigen::MatrixXd(0, 2);
  q.beq = Eigen::VectorXd(0);
  q.Ain.resize(3, 2);
  q.Ain << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  q.cin = Eigen::Vector3d(-2.0, 0.0, 0.0);
  const auto res = solve_qp(q, Eigen::Vector2d(0.0, 0.0), {1, 2});
  CHECK((res.x - Eigen::Vector2d(1.5, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.working_set == std::vector<std::size_t>{0});
  CHECK(std::abs(res.alpha(0) - 1.0) <= 1e-12);
  CHECK((res.x - brute_force(q)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("iteration cap") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd g(4);
  g << -10.0, 0.0, 0.0, 0.0;
  const auto q = simplex_problem(h, g);
  QpOptions opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS(solve_qp(q, Eigen::VectorXd::Constant(4, 0.25), {}, opt), SolverError);
  const auto res = solve_qp(q, Eigen::VectorXd::Constant(4, 0.25), {});
  CHECK((res.x - Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.working_set == std::vector<std::size_t>{1, 2, 3});
}
