#include <doctest.h>

#include "oracles.hpp"
#include "sgeo/datagen.hpp"
#include "sgeo/error.hpp"
#include "sgeo/model_io.hpp"

using namespace sgeo;

TEST_CASE("random streams") {
  Rng a(7), b(7), c(7, 1), d(8);
  const double va = a.uniform();
  CHECK(va == b.uniform());
  CHECK(va != c.uniform());
  CHECK(va != d.uniform());
  Rng e(9);
  for (int i = 0; i < 1000; ++i) {
    const auto k = e.index(5);
    REQUIRE(k < 5);
    const double u = e.uniform(2.0, 3.0);
    REQUIRE(u >= 2.0);
    REQUIRE(u < 3.0);
    REQUIRE(e.gamma(0.5) > 0.0);
  }
}

TEST_CASE("site schemes") {
  GeneratorSpec spec;
  spec.n = 4;
  spec.d = 1;
  spec.sites = Grid{1.0};
  const auto g = gen_sites(spec);
  CHECK(g.coords() == (Eigen::MatrixXd(4, 1) << 0, 1, 2, 3).finished());

  spec.n = 6;
  spec.d = 2;
  const auto g2 = gen_sites(spec);
  CHECK(g2.size() == 6);
  CHECK(g2.site(5)(0) == 1.0);
  CHECK(g2.site(5)(1) == 2.0);

  spec.sites = UniformBox{10.0};
  spec.seed = 3;
  const auto u1 = gen_sites(spec);
  CHECK(u1.coords() == gen_sites(spec).coords());
  CHECK(u1.coords().minCoeff() >= 0.0);
  CHECK(u1.coords().maxCoeff() <= 10.0);
  spec.seed = 4;
  CHECK(u1.coords() != gen_sites(spec).coords());

  spec.n = 3;
  spec.d = 2;
  spec.sites = Clustered{1e-2, 10.0};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.seed = seed;
    const auto s = gen_sites(spec);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) dmin = std::min(dmin, (s.site(i) - s.site(j)).norm());
    }
    REQUIRE(std::abs(dmin - 1e-2) <= 1e-12);
  }

  spec.sites = Grid{0.0};
  CHECK_THROWS_AS(gen_sites(spec), DomainError);
}

TEST_CASE("Dirichlet compositions") {
  GeneratorSpec spec;
  spec.n = 500;
  spec.p = 5;
  spec.seed = 11;
  spec.data = Dirichlet{0.3, 1e-6};
  const auto sites = gen_sites(spec);
  const auto ds = gen_compositions(spec, sites);
  CHECK(ds.size() == 500);
  for (const auto& r : ds.rows()) {
    double s = 0.0;
    for (double v : r.values()) {
      REQUIRE(v >= 1e-6);
      REQUIRE(v <= 1.0);
      s += v;
    }
    REQUIRE(std::abs(s - 1.0) <= 1e-12);
  }
  const auto again = gen_compositions(spec, sites);
  for (std::size_t i = 0; i < ds.size(); ++i) REQUIRE(again.row(i).values() == ds.row(i).values());

  // Mean of Dirichlet(alpha, ..., alpha) parts is 1/p.
  Rng rng(12);
  double first = 0.0;
  for (int i = 0; i < 20000; ++i) first += random_dirichlet(rng, 4, 2.0)[0];
  CHECK(std::abs(first / 20000 - 0.25) < 0.01);
}

TEST_CASE("Gaussian field sampler reproduces the covariance") {
  Eigen::MatrixXd sig(2, 2);
  sig << 1.0, 0.6, 0.6, 2.0;
  const auto model = CovModel::proportional(sig, CorrelationFunction(CorrelationFamily::exponential, 2.0));
  const auto sites = SiteSet{{0.0}, {1.0}, {2.5}, {4.0}, {7.0}};
  const GaussianFieldSampler sampler(model, sites);
  const auto target = sampler.covariance();
  REQUIRE(target.rows() == 10);
  Rng rng(13);
  const int reps = 10000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(10, 10);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  for (int r = 0; r < reps; ++r) {
    const auto z = sampler.sample(rng);
    acc += z * z.transpose();
    mean += z;
  }
  mean /= reps;
  const Eigen::MatrixXd emp = acc / reps - mean * mean.transpose();
  CHECK((emp - target).norm() / target.norm() < 0.05);
}

TEST_CASE("nugget field has independent sites") {
  Eigen::MatrixXd sig(2, 2);
  sig << 1.0, 0.3, 0.3, 1.0;
  GeneratorSpec spec;
  spec.n = 3;
  spec.p = 2;
  spec.sites = Grid{1.0};
  spec.data = GaussianField{CovModel::proportional(sig, CorrelationFunction(CorrelationFamily::nugget, 1.0))};
  const auto sites = gen_sites(spec);
  const GaussianFieldSampler sampler(std::get<GaussianField>(spec.data).model, sites);
  Rng rng(14);
  const int reps = 10000;
  std::vector<double> a(reps), b(reps);
  for (int r = 0; r < reps; ++r) {
    const auto ds = sampler.sample_dataset(rng);
    a[static_cast<std::size_t>(r)] = ds.row(0)[0];
    b[static_cast<std::size_t>(r)] = ds.row(1)[0];
    REQUIRE(ds.strictly_positive());
  }
  const auto corr = [&] {
    double ma = 0, mb = 0;
    for (int r = 0; r < reps; ++r) {
      ma += a[static_cast<std::size_t>(r)];
      mb += b[static_cast<std::size_t>(r)];
    }
    ma /= reps;
    mb /= reps;
    double sab = 0, saa = 0, sbb = 0;
    for (int r = 0; r < reps; ++r) {
      const double da = a[static_cast<std::size_t>(r)] - ma, db = b[static_cast<std::size_t>(r)] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    return sab / std::sqrt(saa * sbb);
  }();
  CHECK(std::abs(corr) < 0.05);

  spec.seed = 5;
  const auto d1 = gen_compositions(spec, sites);
  const auto d2 = gen_compositions(spec, sites);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d1.row(i).values() == d2.row(i).values());
}

TEST_CASE("generator spec JSON") {
  const auto spec = read_spec_json(R"({"seed": 9, "n": 4, "p": 2, "d": 1,
    "sites": {"scheme": "clustered", "pair_gap": 0.05},
    "data": {"scheme": "gaussian-field", "map": "closure-of-exponentials",
             "model": {"variant": "proportional", "sigma": [[1, 0], [0, 1]],
                       "rho": {"family": "spherical", "range": 3}}}})",
                                   "s.json");
  CHECK(spec.seed == 9);
  CHECK(std::get<Clustered>(spec.sites).pair_gap == 0.05);
  CHECK(spec_to_json(spec_from_json(spec_to_json(spec), "again")) == spec_to_json(spec));

  CHECK_THROWS_AS(read_spec_json(R"({"n": 0})", "a"), InputError);
  CHECK_THROWS_AS(read_spec_json(R"({"sites": {"scheme": "grid", "spacing": -1}})", "b"), InputError);
  CHECK_THROWS_AS(read_spec_json(R"({"data": {"scheme": "uniform"}})", "c"), InputError);
  CHECK_THROWS_AS(read_spec_json(R"({"seed": -3})", "d"), InputError);
  CHECK_THROWS_AS(read_spec_json(R"({"p": 3, "data": {"scheme": "gaussian-field", "model":
      {"variant": "proportional", "sigma": [[1]], "rho": {"family": "nugget", "range": 1}}}})",
                                 "e"),
                  InputError);
  CHECK_THROWS_AS(read_spec_json("{", "f"), InputError);
}
