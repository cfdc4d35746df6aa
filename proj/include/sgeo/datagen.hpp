#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include <json.hpp>

#include "sgeo/covariance.hpp"
#include "sgeo/simplex.hpp"

namespace sgeo {

/// Seeded generator. Streams with the same seed but different ids are
/// independent; nothing is shared between instances.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Generator for trial `index` of a sweep seeded with `seed`.
  static Rng for_trial(std::uint64_t seed, std::uint64_t index) { return Rng(seed, index + 1); }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct UniformBox {
  double extent = 10.0;
};
struct Grid {
  double spacing = 1.0;
};
/// Uniform sites plus one extra site at distance `pair_gap` from the first.
struct Clustered {
  double pair_gap = 1e-2;
  double extent = 10.0;
};
using SiteScheme = std::variant<UniformBox, Grid, Clustered>;

/// Normalized gamma draws; rows with a part below `min_part` are redrawn.
struct Dirichlet {
  double alpha = 1.0;
  double min_part = 1e-6;
};
/// Zero-mean Gaussian field with the given covariance, mapped to the simplex
/// by closing the componentwise exponentials of each site's p-vector.
struct GaussianField {
  CovModel model;
};
using DataScheme = std::variant<Dirichlet, GaussianField>;

struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t n = 10;
  std::size_t p = 3;
  std::size_t d = 1;
  SiteScheme sites = UniformBox{};
  DataScheme data = Dirichlet{};
};

SiteSet gen_sites(const GeneratorSpec& spec);
CompositionalDataset gen_compositions(const GeneratorSpec& spec, const SiteSet& sites);

Composition random_dirichlet(Rng& rng, std::size_t p, double alpha = 1.0, double min_part = 1e-6);
CompositionalDataset random_dataset(Rng& rng, std::size_t n, std::size_t p, double alpha = 1.0,
                                    double min_part = 1e-6);
SiteSet random_sites(Rng& rng, std::size_t n, std::size_t d, double extent = 10.0);

/// Draws np-variate normal vectors with the block covariance of a model.
class GaussianFieldSampler {
 public:
  GaussianFieldSampler(const CovModel& model, const SiteSet& sites);

  /// One field realization in variable-major order.
  Eigen::VectorXd sample(Rng& rng) const;
  CompositionalDataset sample_dataset(Rng& rng) const;
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  SiteSet sites_;
  std::size_t p_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd lower_;
};

GeneratorSpec spec_from_json(const nlohmann::json& j, const std::string& source);
GeneratorSpec read_spec_json(const std::string& text, const std::string& source);
nlohmann::json spec_to_json(const GeneratorSpec& spec);

}  // namespace sgeo
