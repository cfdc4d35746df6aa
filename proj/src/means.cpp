#include "sgeo/means.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

void require_weights(const CompositionalDataset& ds, std::span<const double> weights) {
  if (weights.size() != ds.size()) {
    std::ostringstream msg;
    msg << "got " << weights.size() << " weights for " << ds.size() << " rows";
    throw DomainError(msg.str());
  }
  double s = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw DomainError("weights must be finite");
    s += w;
  }
  if (std::abs(s - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(15);
    msg << "weights sum to " << s << ", not 1";
    throw DomainError(msg.str());
  }
}

void require_positive(const CompositionalDataset& ds, const char* what) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.row(i).strictly_positive()) {
      std::ostringstream msg;
      msg << what << ": row " << i + 1 << " has a zero part";
      throw DomainError(msg.str());
    }
  }
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

std::vector<double> equal_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::string describe(const MeanMethod& method) {
  struct Visitor {
    std::string operator()(const WeightedArithmetic&) const { return "arith"; }
    std::string operator()(const NormalizedGeometric&) const { return "geom"; }
    std::string operator()(const IlrMean&) const { return "ilr"; }
    std::string operator()(const QuasiArithmetic& q) const { return "qam[" + q.phi.describe() + "]"; }
    std::string operator()(const GraphMedian&) const { return "graph-median"; }
    std::string operator()(const L1Median&) const { return "l1-median"; }
  };
  return std::visit(Visitor{}, method);
}

double MeanEstimate::sum() const { return std::accumulate(point.begin(), point.end(), 0.0); }

bool MeanEstimate::in_simplex(double tol) const {
  if (std::abs(sum() - 1.0) > 1e-10) return false;
  return std::all_of(point.begin(), point.end(), [tol](double v) { return v >= -tol && v <= 1.0 + tol; });
}

MeanEstimate weighted_arithmetic_mean(const CompositionalDataset& ds, std::span<const double> weights) {
  require_weights(ds, weights);
  std::vector<double> point(ds.parts(), 0.0);
  for (std::size_t k = 0; k < ds.parts(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) acc += weights[i] * ds.row(i)[k];
    point[k] = acc;
  }
  return {std::move(point), "arith", to_vector(weights), std::nullopt};
}

MeanEstimate normalized_geometric_mean(const CompositionalDataset& ds) {
  require_positive(ds, "normalized geometric mean");
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  std::vector<double> g(ds.parts());
  for (std::size_t k = 0; k < ds.parts(); ++k) {
    double acc = 0.0;
    for (const auto& r : ds.rows()) acc += std::log(r[k]);
    g[k] = std::exp(acc * inv_n);
  }
  auto closed = closure(g);
  return {closed.values(), "geom", std::nullopt, std::nullopt};
}

MeanEstimate ilr_mean(const CompositionalDataset& ds, std::optional<std::span<const double>> weights) {
  require_positive(ds, "ilr mean");
  const std::vector<double> w = weights ? to_vector(*weights) : equal_weights(ds.size());
  require_weights(ds, w);
  std::vector<double> mean(ds.parts() - 1, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto u = ilr(ds.row(i));
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += w[i] * u[j];
  }
  auto x = ilr_inv(IlrCoordinates(std::move(mean)));
  return {x.values(), "ilr", weights ? std::optional(w) : std::nullopt, std::nullopt};
}

ComponentwiseMeans quasi_arithmetic_componentwise(const CompositionalDataset& ds, const GeneratingFunction& phi,
                                                  std::span<const double> weights) {
  require_weights(ds, weights);
  ComponentwiseMeans out;
  out.values.resize(ds.parts());
  for (std::size_t k = 0; k < ds.parts(); ++k) {
    const auto col = ds.column(k);
    out.values[k] = quasi_arithmetic_mean(col, weights, phi);
    out.sum += out.values[k];
  }
  return out;
}

std::vector<MstEdge> half_taxi_mst(const CompositionalDataset& ds) {
  const std::size_t n = ds.size();
  std::vector<MstEdge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, half_taxi_distance(ds.row(i), ds.row(j))});
  }
  std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.length != y.length) return x.length < y.length;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  DisjointSets sets(n);
  std::vector<MstEdge> tree;
  tree.reserve(n > 0 ? n - 1 : 0);
  for (const auto& e : edges) {
    if (sets.unite(e.a, e.b)) {
      tree.push_back(e);
      if (tree.size() + 1 == n) break;
    }
  }
  return tree;
}

MeanEstimate graph_median(const CompositionalDataset& ds) {
  const std::size_t n = ds.size();
  const auto tree = half_taxi_mst(ds);
  std::vector<std::vector<std::size_t>> adjacent(n);
  for (const auto& e : tree) {
    adjacent[e.a].push_back(e.b);
    adjacent[e.b].push_back(e.a);
  }
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = adjacent[i].size();
  std::size_t remaining = n;
  // Strip every current leaf at once until one vertex or one edge is left.
  while (remaining > 2) {
    std::vector<std::size_t> leaves;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && degree[i] <= 1) leaves.push_back(i);
    }
    for (std::size_t leaf : leaves) {
      alive[leaf] = false;
      --remaining;
      for (std::size_t nb : adjacent[leaf]) {
        if (alive[nb]) --degree[nb];
      }
    }
  }
  std::vector<std::size_t> left;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) left.push_back(i);
  }
  if (left.size() == 1) return {ds.row(left[0]).values(), "graph-median", std::nullopt, std::nullopt};
  const auto& nb = adjacent[left[0]];
  if (left.size() != 2 || std::find(nb.begin(), nb.end(), left[1]) == nb.end()) {
    throw SolverError("graph median: pruning left a non-adjacent pair");
  }
  std::vector<double> mid(ds.parts());
  for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (ds.row(left[0])[k] + ds.row(left[1])[k]);
  return {std::move(mid), "graph-median", std::nullopt, std::nullopt};
}

double l1_objective(const CompositionalDataset& ds, std::span<const double> m) {
  double acc = 0.0;
  for (const auto& r : ds.rows()) acc += euclidean(r.parts(), m);
  return acc;
}

namespace {

// Weiszfeld creeps toward a minimizer sitting on a datum, so the nearest datum
// is tested directly once the iteration stops.
std::vector<double> snap_to_optimal_datum(const CompositionalDataset& ds, std::vector<double> m) {
  const std::size_t p = ds.parts();
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double d = euclidean(ds.row(i).parts(), m);
    if (d < best) best = d, nearest = i;
  }
  const auto anchor = ds.row(nearest).parts();
  std::vector<double> resultant(p, 0.0);
  double weight = 0.0;
  for (const auto& r : ds.rows()) {
    const double d = euclidean(r.parts(), anchor);
    if (d == 0.0) {
      weight += 1.0;
      continue;
    }
    for (std::size_t k = 0; k < p; ++k) resultant[k] += (r[k] - anchor[k]) / d;
  }
  double r_norm = 0.0;
  for (double v : resultant) r_norm += v * v;
  if (std::sqrt(r_norm) > weight) return m;
  double at_anchor = 0.0, at_m = 0.0;
  for (const auto& r : ds.rows()) {
    at_anchor += euclidean(r.parts(), anchor);
    at_m += euclidean(r.parts(), m);
  }
  // Ties mean a non-unique minimizer; keep the iterate, which ignores row order.
  if (at_anchor < at_m) return {anchor.begin(), anchor.end()};
  return m;
}

}  // namespace

MeanEstimate l1_median(const CompositionalDataset& ds, double tol, std::size_t max_iterations) {
  const std::size_t n = ds.size();
  const std::size_t p = ds.parts();
  constexpr double kCoincide = 1e-12;
  std::vector<double> m(p, 0.0);
  for (const auto& r : ds.rows()) {
    for (std::size_t k = 0; k < p; ++k) m[k] += r[k] / static_cast<double>(n);
  }
  std::vector<double> pull(p), resultant(p), next(p);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    double inv_sum = 0.0;
    double coincident = 0.0;
    std::fill(pull.begin(), pull.end(), 0.0);
    std::fill(resultant.begin(), resultant.end(), 0.0);
    for (const auto& r : ds.rows()) {
      const double d = euclidean(r.parts(), m);
      if (d <= kCoincide) {
        coincident += 1.0;
        continue;
      }
      inv_sum += 1.0 / d;
      for (std::size_t k = 0; k < p; ++k) {
        pull[k] += r[k] / d;
        resultant[k] += (r[k] - m[k]) / d;
      }
    }
    if (inv_sum == 0.0) break;  // every row sits on m
    for (std::size_t k = 0; k < p; ++k) next[k] = pull[k] / inv_sum;
    if (coincident > 0.0) {
      double r_norm = 0.0;
      for (double v : resultant) r_norm += v * v;
      r_norm = std::sqrt(r_norm);
      // Subgradient condition: the datum under m is optimal.
      if (r_norm <= coincident) break;
      const double share = coincident / r_norm;
      for (std::size_t k = 0; k < p; ++k) next[k] = (1.0 - share) * next[k] + share * m[k];
    }
    double step = 0.0;
    for (std::size_t k = 0; k < p; ++k) step = std::max(step, std::abs(next[k] - m[k]));
    m.swap(next);
    if (step <= tol) return {snap_to_optimal_datum(ds, std::move(m)), "l1-median", std::nullopt, std::nullopt};
    if (iter + 1 == max_iterations) {
      throw SolverError("l1 median: no convergence within iteration cap", m);
    }
  }
  return {snap_to_optimal_datum(ds, std::move(m)), "l1-median", std::nullopt, std::nullopt};
}

MeanEstimate evaluate(const MeanMethod& method, const CompositionalDataset& ds) {
  struct Visitor {
    const CompositionalDataset& ds;
    MeanEstimate operator()(const WeightedArithmetic& m) const {
      return weighted_arithmetic_mean(ds, m.weights ? *m.weights : equal_weights(ds.size()));
    }
    MeanEstimate operator()(const NormalizedGeometric&) const { return normalized_geometric_mean(ds); }
    MeanEstimate operator()(const IlrMean& m) const {
      if (m.weights) return ilr_mean(ds, std::span<const double>(*m.weights));
      return ilr_mean(ds);
    }
    MeanEstimate operator()(const QuasiArithmetic& m) const {
      const auto w = m.weights ? *m.weights : equal_weights(ds.size());
      auto raw = quasi_arithmetic_componentwise(ds, m.phi, w);
      if (raw.sum == 0.0) throw DomainError("quasi-arithmetic means sum to zero; cannot close");
      std::vector<double> point = raw.values;
      if (std::abs(raw.sum - 1.0) > kSumTolerance) {
        for (double& v : point) v /= raw.sum;
      }
      return {std::move(point), "qam[" + m.phi.describe() + "]", m.weights, raw.sum};
    }
    MeanEstimate operator()(const GraphMedian&) const { return graph_median(ds); }
    MeanEstimate operator()(const L1Median& m) const { return l1_median(ds, m.tol); }
  };
  return std::visit(Visitor{ds}, method);
}

}  // namespace sgeo
