#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgeo/simplex.hpp"
#include "sgeo/transforms.hpp"

namespace sgeo {

// Mean methods. Where weights are optional, absent means equal weights 1/n.

struct WeightedArithmetic {
  std::optional<std::vector<double>> weights;
};
struct NormalizedGeometric {};
struct IlrMean {
  std::optional<std::vector<double>> weights;
};
/// Componentwise phi^{-1}(sum_i w_i phi(x_i^k)), followed by closure so the
/// result is a point of the simplex. The raw values are available from
/// quasi_arithmetic_componentwise().
struct QuasiArithmetic {
  GeneratingFunction phi = GeneratingFunction::identity();
  std::optional<std::vector<double>> weights;
};
struct GraphMedian {};
struct L1Median {
  double tol = 1e-10;
};

using MeanMethod = std::variant<WeightedArithmetic, NormalizedGeometric, IlrMean, QuasiArithmetic, GraphMedian, L1Median>;

std::string describe(const MeanMethod& method);

struct MeanEstimate {
  std::vector<double> point;
  std::string method;
  std::optional<std::vector<double>> weights_used;
  /// Sum of the componentwise values before closure (quasi-arithmetic only).
  std::optional<double> raw_component_sum;

  double sum() const;
  /// Every part in [-tol, 1 + tol] and parts summing to one within 1e-10.
  bool in_simplex(double tol = kSumTolerance) const;
  RealSimplexPoint real_point() const { return RealSimplexPoint(point); }
};

MeanEstimate weighted_arithmetic_mean(const CompositionalDataset& ds, std::span<const double> weights);
MeanEstimate normalized_geometric_mean(const CompositionalDataset& ds);
MeanEstimate ilr_mean(const CompositionalDataset& ds, std::optional<std::span<const double>> weights = std::nullopt);

struct ComponentwiseMeans {
  std::vector<double> values;
  double sum = 0.0;
};

/// Raw per-part quasi-arithmetic means; not renormalized.
ComponentwiseMeans quasi_arithmetic_componentwise(const CompositionalDataset& ds, const GeneratingFunction& phi,
                                                  std::span<const double> weights);

struct MstEdge {
  std::size_t a;
  std::size_t b;
  double length;
};

/// Minimum spanning tree under the half-taxi metric (Kruskal; ties broken by
/// (length, smaller index, larger index)).
std::vector<MstEdge> half_taxi_mst(const CompositionalDataset& ds);

/// Leaf-pruned minimum spanning tree centre: a sample point, or the midpoint
/// of two adjacent ones.
MeanEstimate graph_median(const CompositionalDataset& ds);

/// Sum of Euclidean distances from `m` to the rows.
double l1_objective(const CompositionalDataset& ds, std::span<const double> m);

/// Spatial (L1) median by Weiszfeld iteration with the Vardi-Zhang
/// correction at data points. Throws SolverError after `max_iterations`.
MeanEstimate l1_median(const CompositionalDataset& ds, double tol = 1e-10, std::size_t max_iterations = 10000);

MeanEstimate evaluate(const MeanMethod& method, const CompositionalDataset& ds);

std::vector<double> equal_weights(std::size_t n);

}  // namespace sgeo
