#include "sgeo/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void require_same_size(const Composition& x, const Composition& y, const char* op) {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << op << ": part counts differ (" << x.size() << " vs " << y.size() << ")";
    throw DomainError(msg.str());
  }
}

void require_positive(const Composition& x, const char* op) {
  if (!x.strictly_positive()) {
    throw DomainError(std::string(op) + ": log-ratios need strictly positive parts");
  }
}

}  // namespace

Composition::Composition(std::vector<double> parts) : parts_(std::move(parts)) {
  if (parts_.size() < 2) throw DomainError("composition needs at least 2 parts");
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    if (!std::isfinite(parts_[k]) || parts_[k] < 0.0) {
      std::ostringstream msg;
      msg << "composition part " << k + 1 << " is negative or not finite (" << parts_[k] << ")";
      throw DomainError(msg.str());
    }
  }
  const double s = sum_of(parts_);
  const double dev = std::abs(s - 1.0);
  if (dev > kRenormalizeTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "composition parts sum to " << s << ", not 1";
    throw DomainError(msg.str());
  }
  if (dev > kSumTolerance) {
    for (double& v : parts_) v /= s;
  }
}

Composition Composition::uniform(std::size_t p) {
  if (p < 2) throw DomainError("composition needs at least 2 parts");
  return Composition(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

bool Composition::strictly_positive() const {
  return std::all_of(parts_.begin(), parts_.end(), [](double v) { return v > 0.0; });
}

RealSimplexPoint::RealSimplexPoint(std::vector<double> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw DomainError("empty point");
  for (double v : parts_) {
    if (!std::isfinite(v)) throw DomainError("point has a non-finite part");
  }
  const double s = sum_of(parts_);
  if (std::abs(s - 1.0) > kRenormalizeTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "point parts sum to " << s << ", not 1";
    throw DomainError(msg.str());
  }
}

bool RealSimplexPoint::in_simplex(double tol) const {
  return std::all_of(parts_.begin(), parts_.end(),
                     [tol](double v) { return v >= -tol && v <= 1.0 + tol; });
}

SiteSet::SiteSet(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
  if (coords_.rows() < 1) throw DomainError("site set needs at least one site");
  if (coords_.cols() < 1) throw DomainError("sites need at least one coordinate");
  if (!coords_.allFinite()) throw DomainError("site coordinates must be finite");
  for (Eigen::Index i = 0; i < coords_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < coords_.rows(); ++j) {
      if (coords_.row(i) == coords_.row(j)) {
        std::ostringstream msg;
        msg << "sites " << i + 1 << " and " << j + 1 << " coincide";
        throw DomainError(msg.str());
      }
    }
  }
}

SiteSet::SiteSet(std::initializer_list<std::initializer_list<double>> coords)
    : SiteSet([&] {
        const auto n = static_cast<Eigen::Index>(coords.size());
        const auto d = n > 0 ? static_cast<Eigen::Index>(coords.begin()->size()) : 0;
        Eigen::MatrixXd m(n, d);
        Eigen::Index i = 0;
        for (const auto& row : coords) {
          if (static_cast<Eigen::Index>(row.size()) != d) throw DomainError("ragged site list");
          Eigen::Index j = 0;
          for (double v : row) m(i, j++) = v;
          ++i;
        }
        return m;
      }()) {}

SiteSet SiteSet::line(std::size_t n) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  return SiteSet(std::move(m));
}

CompositionalDataset::CompositionalDataset(SiteSet sites, std::vector<Composition> rows)
    : sites_(std::move(sites)), rows_(std::move(rows)) {
  if (rows_.empty()) throw DomainError("empty dataset");
  if (rows_.size() != sites_.size()) {
    std::ostringstream msg;
    msg << "dataset has " << rows_.size() << " rows but " << sites_.size() << " sites";
    throw DomainError(msg.str());
  }
  const std::size_t p = rows_.front().size();
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].size() != p) {
      std::ostringstream msg;
      msg << "row " << i + 1 << " has " << rows_[i].size() << " parts, expected " << p;
      throw DomainError(msg.str());
    }
  }
}

CompositionalDataset CompositionalDataset::from_rows(std::vector<Composition> rows) {
  if (rows.empty()) throw DomainError("empty dataset");
  auto sites = SiteSet::line(rows.size());
  return CompositionalDataset(std::move(sites), std::move(rows));
}

std::vector<double> CompositionalDataset::column(std::size_t k) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[k]);
  return out;
}

bool CompositionalDataset::strictly_positive() const {
  return std::all_of(rows_.begin(), rows_.end(), [](const Composition& r) { return r.strictly_positive(); });
}

CompositionalDataset CompositionalDataset::with_row(std::size_t i, Composition replacement) const {
  if (i >= rows_.size()) throw DomainError("row index out of range");
  auto rows = rows_;
  rows[i] = std::move(replacement);
  return CompositionalDataset(sites_, std::move(rows));
}

CompositionalDataset CompositionalDataset::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != rows_.size()) throw DomainError("permutation length differs from row count");
  std::vector<bool> seen(rows_.size(), false);
  Eigen::MatrixXd coords(sites_.coords().rows(), sites_.coords().cols());
  std::vector<Composition> rows;
  rows.reserve(rows_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const std::size_t src = perm[i];
    if (src >= rows_.size() || seen[src]) throw DomainError("not a permutation");
    seen[src] = true;
    rows.push_back(rows_[src]);
    coords.row(static_cast<Eigen::Index>(i)) = sites_.coords().row(static_cast<Eigen::Index>(src));
  }
  return CompositionalDataset(SiteSet(std::move(coords)), std::move(rows));
}

Grouping::Grouping(std::vector<std::vector<std::size_t>> blocks, std::size_t q)
    : blocks_(std::move(blocks)), q_(q) {
  if (blocks_.size() < 2) throw DomainError("grouping needs at least two blocks");
  std::vector<int> hits(q_, 0);
  for (const auto& b : blocks_) {
    if (b.empty()) throw DomainError("grouping has an empty block");
    for (std::size_t idx : b) {
      if (idx >= q_) throw DomainError("grouping index out of range");
      ++hits[idx];
    }
  }
  for (std::size_t k = 0; k < q_; ++k) {
    if (hits[k] != 1) {
      std::ostringstream msg;
      msg << "part " << k + 1 << (hits[k] == 0 ? " is not covered" : " appears in several blocks")
          << " by the grouping";
      throw DomainError(msg.str());
    }
  }
}

Grouping Grouping::identity(std::size_t q) {
  std::vector<std::vector<std::size_t>> blocks(q);
  for (std::size_t k = 0; k < q; ++k) blocks[k] = {k};
  return Grouping(std::move(blocks), q);
}

Composition closure(std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k]) || v[k] < 0.0) {
      std::ostringstream msg;
      msg << "closure: entry " << k + 1 << " is negative or not finite";
      throw DomainError(msg.str());
    }
    s += v[k];
  }
  if (!(s > 0.0)) throw DomainError("closure: all entries are zero");
  std::vector<double> out(v.begin(), v.end());
  // Already closed: keep the values bit for bit so closure is idempotent.
  if (std::abs(s - 1.0) > kSumTolerance) {
    for (double& x : out) x /= s;
  }
  return Composition(std::move(out));
}

double half_taxi_distance(const Composition& x, const Composition& y) {
  require_same_size(x, y, "half_taxi_distance");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += std::abs(x[k] - y[k]);
  return 0.5 * acc;
}

double aitchison_inner(const Composition& x, const Composition& y) {
  require_same_size(x, y, "aitchison_inner");
  require_positive(x, "aitchison_inner");
  require_positive(y, "aitchison_inner");
  const std::size_t p = x.size();
  double lgx = 0.0, lgy = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    lgx += std::log(x[k]);
    lgy += std::log(y[k]);
  }
  lgx /= static_cast<double>(p);
  lgy /= static_cast<double>(p);
  double acc = 0.0;
  for (std::size_t k = 0; k < p; ++k) acc += (std::log(x[k]) - lgx) * (std::log(y[k]) - lgy);
  return acc;
}

double aitchison_inner_pairwise(const Composition& x, const Composition& y) {
  require_same_size(x, y, "aitchison_inner");
  require_positive(x, "aitchison_inner");
  require_positive(y, "aitchison_inner");
  const std::size_t p = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) acc += std::log(x[i] / x[j]) * std::log(y[i] / y[j]);
  }
  return acc / static_cast<double>(p);
}

Composition amalgamate(const Composition& x, const Grouping& g) {
  if (x.size() != g.source_parts()) {
    std::ostringstream msg;
    msg << "amalgamate: grouping covers " << g.source_parts() << " parts, composition has " << x.size();
    throw DomainError(msg.str());
  }
  std::vector<double> out;
  out.reserve(g.size());
  for (const auto& block : g.blocks()) {
    double s = 0.0;
    for (std::size_t idx : block) s += x[idx];
    out.push_back(s);
  }
  return Composition(std::move(out));
}

CompositionalDataset amalgamate(const CompositionalDataset& ds, const Grouping& g) {
  std::vector<Composition> rows;
  rows.reserve(ds.size());
  for (const auto& r : ds.rows()) rows.push_back(amalgamate(r, g));
  return CompositionalDataset(ds.sites(), std::move(rows));
}

}  // namespace sgeo
