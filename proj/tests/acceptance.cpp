// Acceptance suite: one PASS/FAIL line per criterion with its runtime.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgeo/axiom_lab.hpp"
#include "sgeo/kriging.hpp"
#include "sgeo/means.hpp"
#include "sgeo/transforms.hpp"

using namespace sgeo;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_ms;  // 0 for no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double maxabs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::size_t count(const std::vector<AxiomReport>& rs, Verdict v) {
  std::size_t c = 0;
  for (const auto& r : rs) c += r.verdict == v;
  return c;
}

MeanMethod method(const std::string& name, std::optional<std::string> phi = std::nullopt) {
  return make_method(name, std::nullopt, phi);
}

// Nonnegative-weight solves seen by any criterion, for the simplex guarantee.
struct SimplexTally {
  std::size_t solves = 0;
  std::size_t outside = 0;
  double worst = 0.0;  // largest excursion beyond [0, 1]

  void add(const std::vector<double>& point) {
    ++solves;
    double ex = 0.0;
    for (double v : point) ex = std::max({ex, -v, v - 1.0});
    worst = std::max(worst, ex);
    if (ex > 1e-12) ++outside;
  }
  void add(const Eigen::VectorXd& v) { add(std::vector<double>(v.data(), v.data() + v.size())); }
};
SimplexTally tally;

// Cokriging checks from criteria 5 and 6, for the identities of criterion 7.
std::vector<CokrigingCheck> cokriging_checks;

void record(const Theorem3Sweep& sw) {
  for (const auto& c : sw.checks) {
    cokriging_checks.push_back(c);
    if (c.nonnegative) {
      ++tally.solves;
      if (!c.in_simplex) ++tally.outside;
    }
  }
}

CompositionalDataset random_data(std::mt19937_64& eng, const SiteSet& sites, std::size_t p) {
  std::vector<Composition> rows;
  for (std::size_t i = 0; i < sites.size(); ++i) rows.emplace_back(oracle::random_composition(eng, p, 0.0));
  return CompositionalDataset(sites, std::move(rows));
}

Outcome ilr_example() {
  const auto u = ilr(Composition(fixture::kX));
  const auto v = ilr(Composition(fixture::kXPrime));
  const auto ds = CompositionalDataset::from_rows({Composition(fixture::kX), Composition(fixture::kXPrime)});
  const auto back = ilr_mean(ds).point;
  const double e = std::max({std::abs(u[0] - 0.490), std::abs(u[1] - 1.180), std::abs(v[0] - 0.000),
                             std::abs(v[1] + 0.235), std::abs(back[0] - 0.459), std::abs(back[1] - 0.325),
                             std::abs(back[2] - 0.216)});
  return {e <= 5e-4, "u = (" + fmt(u[0]) + ", " + fmt(u[1]) + "), u' = (" + fmt(v[0]) + ", " + fmt(v[1]) +
                         "), mean = (" + fmt(back[0]) + ", " + fmt(back[1]) + ", " + fmt(back[2]) +
                         "), max error " + fmt(e)};
}

Outcome second_part_increase() {
  const auto ds = CompositionalDataset::from_rows({Composition(fixture::kX), Composition(fixture::kXPrime)});
  const double m = ilr_mean(ds).point[1];
  const double rel = (m / 0.3 - 1.0) * 100.0;
  return {std::abs(m - 0.325) <= 5e-4 && std::abs(rel - 8.3) <= 0.2,
          "second part " + fmt(m) + " from inputs 0.3 and 0.3, +" + fmt(rel) + "%"};
}

Outcome exclusivity() {
  SweepOptions opt;
  opt.seed = 1;
  opt.trials = 1000;
  const auto c1 = sweep(Axiom::c1, method("arith"), opt);
  const auto c2 = sweep(Axiom::c2, method("arith"), opt);
  bool pass = count(c1, Verdict::pass) == 1000 && count(c2, Verdict::pass) == 1000 &&
              worst(c1).residual <= 1e-10 && worst(c2).residual <= 1e-10;
  std::ostringstream d;
  d << "arith C1 " << count(c1, Verdict::pass) << "/1000, C2 " << count(c2, Verdict::pass) << "/1000";
  for (const auto& [name, m] : {std::pair<std::string, MeanMethod>{"geom", method("geom")},
                                {"ilr", method("ilr")},
                                {"qam-log", method("qam", "log")}}) {
    const auto w = check_marginal_stability(m, fixture::c2_witness_dataset(), fixture::c2_witness_a(),
                                            fixture::c2_witness_b());
    const auto again = replay(w);
    const auto rs = sweep(Axiom::c2, m, opt);
    const bool ok = w.verdict == Verdict::fail && w.residual > 1e-3 && again.residual == w.residual &&
                    count(rs, Verdict::fail) > 0;
    pass = pass && ok;
    d << "; " << name << " witness gap " << fmt(w.residual) << ", sweep fails " << count(rs, Verdict::fail);
  }
  return {pass, d.str()};
}

Outcome two_part_exception() {
  SweepOptions opt;
  opt.seed = 1;
  opt.trials = 1000;
  opt.parts = 2;
  opt.output_parts = 2;
  const auto m = method("qam", "sine:0.1");
  bool pass = true;
  std::ostringstream d;
  for (Axiom a : {Axiom::c1, Axiom::c2, Axiom::sum_to_one}) {
    const auto rs = sweep(a, m, opt);
    pass = pass && count(rs, Verdict::pass) == 1000 && worst(rs).residual <= 1e-10;
    d << to_string(a) << " " << count(rs, Verdict::pass) << "/1000 (max " << fmt(worst(rs).residual) << ") ";
  }
  return {pass, d.str()};
}

Outcome theorem3_forward() {
  const auto sw = theorem3_sweep(true, 500, 1);
  record(sw);
  double single = 0.0;
  for (const auto& c : sw.checks) single = std::max(single, c.single_gap);
  const bool pass = sw.hits == 500 && sw.max_deviation <= 1e-9 && single <= 1e-10;
  return {pass, std::to_string(sw.hits) + "/500 equal; max cross-variable deviation " + fmt(sw.max_deviation) +
                    ", max gap to single-variable weights " + fmt(single)};
}

Outcome theorem3_converse() {
  const auto fx = theorem3_check({fixture::lmc_witness(), fixture::lmc_witness_sites()}, 0, 0);
  Rng rng(0);
  Theorem3Sweep fixture_sweep;
  fixture_sweep.checks.push_back(check_cokriging({fixture::lmc_witness(), fixture::lmc_witness_sites()}, rng));
  record(fixture_sweep);
  const auto sw = theorem3_sweep(false, 200, 1);
  record(sw);
  return {fx.residual > 1e-3, "fixture deviation " + fmt(fx.residual) + "; random LMC above 1e-6: " +
                                  fmt(100.0 * sw.fraction) + "% of 200 (reported)"};
}

Outcome system_identities() {
  double stat = 0.0, unb = 0.0, mu = 0.0;
  for (const auto& c : cokriging_checks) {
    stat = std::max(stat, c.stationarity);
    unb = std::max(unb, c.unbiasedness);
    mu = std::max(mu, c.mu_identity);
  }
  const bool pass = !cokriging_checks.empty() && stat <= 1e-8 && unb <= 1e-9 && mu <= 1e-8;
  return {pass, std::to_string(cokriging_checks.size()) + " solves; |C L - J mu|/|C| " + fmt(stat) +
                    ", |J^T L - I| " + fmt(unb) + ", |mu - (J^T C^-1 J)^-1|/|mu| " + fmt(mu)};
}

Outcome constrained_oracle() {
  std::mt19937_64 eng(8);
  Rng rng(8);
  double obj_gap = 0.0, w_gap = 0.0, kkt = 0.0;
  int constrained = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 8;
    Eigen::MatrixXd c;
    if (t % 2 == 0) {
      c = oracle::random_spd(eng, n, 0.05);
    } else {
      const auto sites = random_sites(rng, static_cast<std::size_t>(n), 1, 3.0);
      c = correlation_matrix(CorrelationFunction(CorrelationFamily::gaussian, 0.5), sites) +
          1e-3 * Eigen::MatrixXd::Identity(n, n);
    }
    const auto sol = nonneg_krige_mean(c);
    const Eigen::VectorXd lam = sol.lambda.col(0);
    const auto brute = oracle::enumerate_nonneg(c);
    obj_gap = std::max(obj_gap, std::abs(lam.dot(c * lam) - brute.objective));
    w_gap = std::max(w_gap, maxabs(lam - brute.lambda));
    kkt = std::max(kkt, sol.kkt.max());
    if (!sol.active_set.empty()) ++constrained;
    // Estimates from nonnegative weights applied to random data.
    const auto ds = random_data(eng, SiteSet::line(static_cast<std::size_t>(n)), 3);
    tally.add(apply_weights(sol, ds));
  }
  return {obj_gap <= 1e-10 && w_gap <= 1e-8 && kkt <= 1e-8,
          "300 instances (" + std::to_string(constrained) + " with active constraints); objective gap " +
              fmt(obj_gap) + ", weight gap " + fmt(w_gap) + ", KKT " + fmt(kkt)};
}

Outcome simplex_guarantee() {
  // Arithmetic means with nonnegative weights and shared nonnegative cokriging.
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 8);
    const auto ds = random_data(eng, SiteSet::line(n), 3 + static_cast<std::size_t>(t % 4));
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = u(eng));
    for (auto& v : w) v /= s;
    tally.add(weighted_arithmetic_mean(ds, w).point);
  }
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto cfg = random_lmc_config(rng);
    const auto sol = nonneg_cokrige_means(cfg.model, cfg.sites);
    if (!weights_nonnegative(sol)) continue;
    tally.add(apply_weights(sol, random_data(eng, cfg.sites, cfg.model.parts())));
  }
  return {tally.outside == 0, std::to_string(tally.solves) + " nonnegative-weight estimates, " +
                                  std::to_string(tally.outside) + " outside the simplex (max excursion " +
                                  fmt(tally.worst) + ")"};
}

Outcome walvoort_incompatibility() {
  const auto sites = fixture::lmc_witness_sites();
  const auto a = CompositionalDataset(sites, {Composition({0.2, 0.8}), Composition({0.6, 0.4}), Composition({0.3, 0.7})});
  const auto b = a.with_row(1, Composition({0.9, 0.1}));
  const auto wa = walvoort_compositional_krige(fixture::lmc_witness(), sites, a);
  const auto wb = walvoort_compositional_krige(fixture::lmc_witness(), sites, b);
  const double diff = maxabs(wa.weights(0, 0) - wb.weights(0, 0));
  const auto ca = cokrige_means(fixture::lmc_witness(), sites);
  const auto cb = cokrige_means(fixture::lmc_witness(), sites);
  const auto sa = nonneg_cokrige_means(fixture::lmc_witness(), sites);
  const auto sb = nonneg_cokrige_means(fixture::lmc_witness(), sites);
  const double co = std::max(maxabs(ca.stacked() - cb.stacked()), maxabs(sa.lambda - sb.lambda));
  for (const auto* w : {&wa, &wb}) {
    if (weights_nonnegative(*w)) tally.add(*w->estimates);
  }
  const double kkt = std::max(wa.kkt.max(), wb.kkt.max());
  return {diff > 1e-6 && co == 0.0 && kkt <= 1e-8,
          "part-1 Walvoort weights move by " + fmt(diff) + "; cokriging weights move by " + fmt(co) + "; KKT " +
              fmt(kkt)};
}

Outcome graph_median_cases() {
  const auto two = CompositionalDataset::from_rows({Composition(fixture::kX), Composition(fixture::kXPrime)});
  const auto mid = graph_median(two).point;
  bool pass = true;
  for (std::size_t k = 0; k < 3; ++k) pass = pass && mid[k] == 0.5 * (fixture::kX[k] + fixture::kXPrime[k]);
  std::mt19937_64 eng(11);
  int chain_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto ds = random_data(eng, SiteSet::line(3), 3);
    const double d01 = half_taxi_distance(ds.row(0), ds.row(1));
    const double d02 = half_taxi_distance(ds.row(0), ds.row(2));
    const double d12 = half_taxi_distance(ds.row(1), ds.row(2));
    const double trees[3] = {d01 + d02, d01 + d12, d02 + d12};
    const auto centre = static_cast<std::size_t>(std::min_element(trees, trees + 3) - trees);
    chain_ok += graph_median(ds).point == ds.row(centre).values();
  }
  const auto before = graph_median(fixture::graph_jump_before()).point;
  const auto after = graph_median(fixture::graph_jump_after()).point;
  double moved = 0.0, jump = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    moved = std::max(moved, std::abs(fixture::graph_jump_before().row(fixture::kGraphJumpDatum)[k] -
                                     fixture::graph_jump_after().row(fixture::kGraphJumpDatum)[k]));
    jump += 0.5 * std::abs(before[k] - after[k]);
  }
  pass = pass && chain_ok == 1000 && moved <= 1e-6 + 1e-15 && jump > 0.1;
  return {pass, "midpoint (" + fmt(mid[0]) + ", " + fmt(mid[1]) + ", " + fmt(mid[2]) + ")" +
                    "; chain " + std::to_string(chain_ok) + "/1000; fixture jump " + fmt(jump) + " under a " +
                    fmt(moved) + " move"};
}

}  // namespace

int main() {
  // Criteria 7 and 9 aggregate results of the ones before them, so the run
  // order differs from the numbering.
  const std::vector<Criterion> criteria{
      {1, "ilr worked example", 1.0, ilr_example},
      {2, "second-part increase of the ilr mean", 0.0, second_part_increase},
      {3, "only the arithmetic mean is marginally stable", 10000.0, exclusivity},
      {4, "two-part quasi-arithmetic exception", 5000.0, two_part_exception},
      {5, "proportional models give equal cokriging weights", 30000.0, theorem3_forward},
      {6, "LMC witness breaks equal weights", 20000.0, theorem3_converse},
      {7, "cokriging system identities", 0.0, system_identities},
      {8, "nonnegative kriging matches enumeration", 60000.0, constrained_oracle},
      {10, "Walvoort weights depend on the data", 5000.0, walvoort_incompatibility},
      {9, "nonnegative weights keep estimates in the simplex", 0.0, simplex_guarantee},
      {11, "graph median cases and discontinuity", 0.0, graph_median_cases},
  };
  struct Line {
    int id;
    std::string text;
  };
  std::vector<Line> lines;
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_ms > 0.0 && ms >= c.limit_ms) {
      o.pass = false;
      o.detail += "; runtime limit " + fmt(c.limit_ms) + " ms exceeded";
    }
    failed += !o.pass;
    char head[160];
    std::snprintf(head, sizeof head, "%s  %2d  %-50s %10.3f ms  ", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), ms);
    lines.push_back({c.id, head + o.detail});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  for (const auto& l : lines) std::printf("%s\n", l.text.c_str());
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
