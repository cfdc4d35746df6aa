#include "sgeo/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "sgeo/error.hpp"
#include "sgeo/model_io.hpp"

namespace sgeo {

using nlohmann::json;

namespace {

constexpr int kMaxRedraws = 10000;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

double min_distance_to(const Eigen::MatrixXd& pts, Eigen::Index upto, const Eigen::RowVectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < upto; ++i) best = std::min(best, (pts.row(i) - x).norm());
  return best;
}

Eigen::RowVectorXd box_point(Rng& rng, std::size_t d, double extent) {
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(0.0, extent);
  return x;
}

[[noreturn]] void spec_error(const std::string& source, const std::string& path, const std::string& what) {
  throw InputError(source + ": " + path + ": " + what);
}

double num(const json& obj, const char* key, double fallback, const std::string& source, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) spec_error(source, path + "." + key, "expected a number");
  return it->get<double>();
}

std::size_t count(const json& obj, const char* key, std::size_t fallback, const std::string& source) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned()) spec_error(source, std::string("$.") + key, "expected a nonnegative integer");
  return it->get<std::size_t>();
}

std::string scheme_name(const json& obj, const std::string& source, const std::string& path) {
  if (!obj.is_object()) spec_error(source, path, "expected an object");
  auto it = obj.find("scheme");
  if (it == obj.end() || !it->is_string()) spec_error(source, path + ".scheme", "expected a string");
  return it->get<std::string>();
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{lo32(seed), hi32(seed), lo32(stream), hi32(stream)};
  engine_.seed(seq);
}

double Rng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double Rng::gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

std::size_t Rng::index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

Composition random_dirichlet(Rng& rng, std::size_t p, double alpha, double min_part) {
  if (p < 2) throw DomainError("compositions need at least two parts");
  if (!(alpha > 0.0)) throw DomainError("Dirichlet concentration must be positive");
  if (!(min_part >= 0.0) || min_part * static_cast<double>(p) >= 1.0) {
    throw DomainError("minimum part is unattainable for this part count");
  }
  std::vector<double> g(p);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    for (auto& v : g) v = rng.gamma(alpha);
    double s = 0.0;
    for (double v : g) s += v;
    if (!(s > 0.0)) continue;
    auto x = closure(g);
    if (*std::min_element(x.values().begin(), x.values().end()) >= min_part) return x;
  }
  throw SolverError("Dirichlet draw kept falling below the minimum part");
}

CompositionalDataset random_dataset(Rng& rng, std::size_t n, std::size_t p, double alpha, double min_part) {
  std::vector<Composition> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_dirichlet(rng, p, alpha, min_part));
  return CompositionalDataset::from_rows(std::move(rows));
}

SiteSet random_sites(Rng& rng, std::size_t n, std::size_t d, double extent) {
  if (n == 0 || d == 0) throw DomainError("need at least one site and one dimension");
  if (!(extent > 0.0)) throw DomainError("box extent must be positive");
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Eigen::RowVectorXd x = box_point(rng, d, extent);
    while (min_distance_to(pts, i, x) == 0.0) x = box_point(rng, d, extent);
    pts.row(i) = x;
  }
  return SiteSet(std::move(pts));
}

SiteSet gen_sites(const GeneratorSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw DomainError("need at least one site and one dimension");
  Rng rng(spec.seed, 0);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto d = static_cast<Eigen::Index>(spec.d);
  if (const auto* box = std::get_if<UniformBox>(&spec.sites)) return random_sites(rng, spec.n, spec.d, box->extent);
  if (const auto* grid = std::get_if<Grid>(&spec.sites)) {
    if (!(grid->spacing > 0.0)) throw DomainError("grid spacing must be positive");
    auto side = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(spec.n), 1.0 / static_cast<double>(d))));
    while (std::pow(static_cast<double>(side), static_cast<double>(d)) < static_cast<double>(spec.n)) ++side;
    Eigen::MatrixXd pts(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto rest = static_cast<std::size_t>(i);
      for (Eigen::Index k = d - 1; k >= 0; --k) {
        pts(i, k) = grid->spacing * static_cast<double>(rest % side);
        rest /= side;
      }
    }
    return SiteSet(std::move(pts));
  }
  const auto& cl = std::get<Clustered>(spec.sites);
  if (!(cl.pair_gap > 0.0) || !(cl.extent > 0.0)) throw DomainError("cluster gap and extent must be positive");
  if (spec.n == 1) return random_sites(rng, 1, spec.d, cl.extent);
  // Other sites keep at least ten gaps apart so the pair is the closest one.
  const double separation = 10.0 * cl.pair_gap;
  Eigen::MatrixXd pts(n, d);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    bool ok = true;
    for (Eigen::Index i = 0; i + 1 < n && ok; ++i) {
      int tries = 0;
      Eigen::RowVectorXd x = box_point(rng, spec.d, cl.extent);
      while (min_distance_to(pts, i, x) < separation && ++tries < kMaxRedraws) x = box_point(rng, spec.d, cl.extent);
      ok = tries < kMaxRedraws;
      pts.row(i) = x;
    }
    if (!ok) continue;
    Eigen::RowVectorXd dir(d);
    for (Eigen::Index k = 0; k < d; ++k) dir(k) = rng.normal();
    if (dir.norm() == 0.0) continue;
    const Eigen::RowVectorXd partner = pts.row(0) + cl.pair_gap * dir / dir.norm();
    pts.row(n - 1) = partner;
    bool clear = true;
    for (Eigen::Index i = 1; i + 1 < n; ++i) clear = clear && (pts.row(i) - partner).norm() > cl.pair_gap;
    if (clear) return SiteSet(std::move(pts));
  }
  throw SolverError("could not place clustered sites in the box");
}

GaussianFieldSampler::GaussianFieldSampler(const CovModel& model, const SiteSet& sites)
    : sites_(sites), p_(model.parts()), cov_(build_block_matrix(model, sites).matrix()) {
  lower_ = Eigen::LLT<Eigen::MatrixXd>(cov_).matrixL();
}

Eigen::VectorXd GaussianFieldSampler::sample(Rng& rng) const {
  Eigen::VectorXd z(cov_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return lower_ * z;
}

CompositionalDataset GaussianFieldSampler::sample_dataset(Rng& rng) const {
  const Eigen::VectorXd y = sample(rng);
  const std::size_t n = sites_.size();
  std::vector<Composition> rows;
  rows.reserve(n);
  std::vector<double> e(p_);
  for (std::size_t i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p_; ++k) top = std::max(top, y(static_cast<Eigen::Index>(k * n + i)));
    // Shifting by the largest value keeps exp() finite without changing the closure.
    for (std::size_t k = 0; k < p_; ++k) e[k] = std::exp(y(static_cast<Eigen::Index>(k * n + i)) - top);
    rows.push_back(closure(e));
  }
  return CompositionalDataset(sites_, std::move(rows));
}

CompositionalDataset gen_compositions(const GeneratorSpec& spec, const SiteSet& sites) {
  Rng rng(spec.seed, 1);
  if (const auto* dir = std::get_if<Dirichlet>(&spec.data)) {
    std::vector<Composition> rows;
    rows.reserve(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) rows.push_back(random_dirichlet(rng, spec.p, dir->alpha, dir->min_part));
    return CompositionalDataset(sites, std::move(rows));
  }
  const auto& field = std::get<GaussianField>(spec.data);
  if (field.model.parts() != spec.p) throw DomainError("model part count differs from the requested p");
  return GaussianFieldSampler(field.model, sites).sample_dataset(rng);
}

GeneratorSpec spec_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) spec_error(source, "$", "expected an object");
  GeneratorSpec spec;
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) spec_error(source, "$.seed", "expected a nonnegative integer");
    spec.seed = it->get<std::uint64_t>();
  }
  spec.n = count(j, "n", spec.n, source);
  spec.p = count(j, "p", spec.p, source);
  spec.d = count(j, "d", spec.d, source);
  if (spec.n == 0) spec_error(source, "$.n", "must be at least 1");
  if (spec.d == 0) spec_error(source, "$.d", "must be at least 1");
  if (spec.p < 2) spec_error(source, "$.p", "must be at least 2");

  if (auto it = j.find("sites"); it != j.end()) {
    const auto name = scheme_name(*it, source, "$.sites");
    if (name == "uniform-box") {
      spec.sites = UniformBox{num(*it, "extent", 10.0, source, "$.sites")};
    } else if (name == "grid") {
      const double spacing = num(*it, "spacing", 1.0, source, "$.sites");
      if (!(spacing > 0.0)) spec_error(source, "$.sites.spacing", "grid spacing must be positive");
      spec.sites = Grid{spacing};
    } else if (name == "clustered") {
      spec.sites = Clustered{num(*it, "pair_gap", 1e-2, source, "$.sites"), num(*it, "extent", 10.0, source, "$.sites")};
    } else {
      spec_error(source, "$.sites.scheme", "unknown site scheme '" + name + "'");
    }
  }
  if (auto it = j.find("data"); it != j.end()) {
    const auto name = scheme_name(*it, source, "$.data");
    if (name == "dirichlet") {
      const double alpha = num(*it, "alpha", 1.0, source, "$.data");
      if (!(alpha > 0.0)) spec_error(source, "$.data.alpha", "concentration must be positive");
      spec.data = Dirichlet{alpha, num(*it, "min_part", 1e-6, source, "$.data")};
    } else if (name == "gaussian-field") {
      auto m = it->find("model");
      if (m == it->end()) spec_error(source, "$.data", "missing key 'model'");
      if (auto map = it->find("map"); map != it->end() && *map != "closure-of-exponentials") {
        spec_error(source, "$.data.map", "only closure-of-exponentials is supported");
      }
      spec.data = GaussianField{model_from_json(*m, source)};
      if (std::get<GaussianField>(spec.data).model.parts() != spec.p) {
        spec_error(source, "$.data.model", "model part count differs from p");
      }
    } else {
      spec_error(source, "$.data.scheme", "unknown data scheme '" + name + "'");
    }
  }
  return spec;
}

GeneratorSpec read_spec_json(const std::string& text, const std::string& source) {
  return spec_from_json(parse_json_text(text, source), source);
}

json spec_to_json(const GeneratorSpec& spec) {
  json sites;
  if (const auto* box = std::get_if<UniformBox>(&spec.sites)) {
    sites = {{"scheme", "uniform-box"}, {"extent", box->extent}};
  } else if (const auto* grid = std::get_if<Grid>(&spec.sites)) {
    sites = {{"scheme", "grid"}, {"spacing", grid->spacing}};
  } else {
    const auto& cl = std::get<Clustered>(spec.sites);
    sites = {{"scheme", "clustered"}, {"pair_gap", cl.pair_gap}, {"extent", cl.extent}};
  }
  json data;
  if (const auto* dir = std::get_if<Dirichlet>(&spec.data)) {
    data = {{"scheme", "dirichlet"}, {"alpha", dir->alpha}, {"min_part", dir->min_part}};
  } else {
    data = {{"scheme", "gaussian-field"},
            {"model", model_to_json(std::get<GaussianField>(spec.data).model)},
            {"map", "closure-of-exponentials"}};
  }
  return {{"seed", spec.seed}, {"n", spec.n}, {"p", spec.p}, {"d", spec.d}, {"sites", sites}, {"data", data}};
}

}  // namespace sgeo
