#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sgeo {

/// Parts of a composition must sum to one within this absolute tolerance.
inline constexpr double kSumTolerance = 1e-12;
/// Inputs whose sum is off by at most this much are silently re-closed;
/// anything larger is rejected.
inline constexpr double kRenormalizeTolerance = 1e-9;

/// A point of the closed simplex: p >= 2 nonnegative parts summing to one.
/// Part order is significant and never changed.
class Composition {
 public:
  explicit Composition(std::vector<double> parts);

  static Composition uniform(std::size_t p);

  std::size_t size() const { return parts_.size(); }
  double operator[](std::size_t k) const { return parts_[k]; }
  std::span<const double> parts() const { return parts_; }
  const std::vector<double>& values() const { return parts_; }
  bool strictly_positive() const;

  friend bool operator==(const Composition&, const Composition&) = default;

 private:
  std::vector<double> parts_;
};

/// A real vector summing to one; parts may be negative. Codomain of
/// unconstrained weighted means.
class RealSimplexPoint {
 public:
  explicit RealSimplexPoint(std::vector<double> parts);

  std::size_t size() const { return parts_.size(); }
  double operator[](std::size_t k) const { return parts_[k]; }
  std::span<const double> parts() const { return parts_; }
  /// True when every part lies in [-tol, 1 + tol].
  bool in_simplex(double tol = kSumTolerance) const;

 private:
  std::vector<double> parts_;
};

/// n distinct sampling sites in R^d, stored row-wise.
class SiteSet {
 public:
  explicit SiteSet(Eigen::MatrixXd coords);
  SiteSet(std::initializer_list<std::initializer_list<double>> coords);

  /// Sites 0, 1, ..., n-1 on a line.
  static SiteSet line(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(coords_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(coords_.cols()); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  Eigen::VectorXd site(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  Eigen::MatrixXd coords_;
};

/// n compositions with a common part count, one per site.
class CompositionalDataset {
 public:
  CompositionalDataset(SiteSet sites, std::vector<Composition> rows);

  /// Rows without meaningful locations; sites are set to 0, 1, ..., n-1.
  static CompositionalDataset from_rows(std::vector<Composition> rows);

  std::size_t size() const { return rows_.size(); }
  std::size_t parts() const { return rows_.front().size(); }
  const SiteSet& sites() const { return sites_; }
  const std::vector<Composition>& rows() const { return rows_; }
  const Composition& row(std::size_t i) const { return rows_[i]; }
  /// Values of part k across all rows.
  std::vector<double> column(std::size_t k) const;
  bool strictly_positive() const;

  CompositionalDataset with_row(std::size_t i, Composition replacement) const;
  /// Row i of the result is row perm[i] of this dataset (sites move along).
  CompositionalDataset permuted(std::span<const std::size_t> perm) const;

 private:
  SiteSet sites_;
  std::vector<Composition> rows_;
};

/// Ordered partition of part indices {0, ..., q-1} into at least two blocks.
class Grouping {
 public:
  Grouping(std::vector<std::vector<std::size_t>> blocks, std::size_t q);

  static Grouping identity(std::size_t q);

  std::size_t source_parts() const { return q_; }
  std::size_t size() const { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::size_t q_;
};

Composition closure(std::span<const double> v);

double half_taxi_distance(const Composition& x, const Composition& y);

/// Aitchison inner product via centred log-ratios.
double aitchison_inner(const Composition& x, const Composition& y);
/// Same quantity through the pairwise log-ratio double sum.
double aitchison_inner_pairwise(const Composition& x, const Composition& y);

Composition amalgamate(const Composition& x, const Grouping& g);
CompositionalDataset amalgamate(const CompositionalDataset& ds, const Grouping& g);

}  // namespace sgeo
