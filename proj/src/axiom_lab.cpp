#include "sgeo/axiom_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "sgeo/error.hpp"
#include "sgeo/model_io.hpp"

namespace sgeo {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSymmetryTol = 1e-12;
constexpr std::uint64_t kCheckStream = std::uint64_t{1} << 32;
constexpr std::uint64_t kProbeStream = std::uint64_t{1} << 33;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double half_taxi(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
  return 0.5 * acc;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

CompositionalDataset repeated(const Composition& x, std::size_t n) {
  return CompositionalDataset::from_rows(std::vector<Composition>(n, x));
}

Composition moved(const Composition& x, std::span<const double> dir, double step) {
  std::vector<double> v = x.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += step * dir[k];
  return Composition(std::move(v));
}

AxiomReport failed_with(Axiom axiom, const MeanMethod& method, const std::string& why, json witness) {
  AxiomReport r;
  r.axiom = axiom;
  r.subject = describe(method);
  r.verdict = Verdict::fail;
  r.residual = kInf;
  r.note = why;
  r.witness = std::move(witness);
  return r;
}

std::vector<std::vector<std::size_t>> random_partition(Rng& rng, std::vector<std::size_t> items, std::size_t blocks) {
  std::shuffle(items.begin(), items.end(), rng.engine());
  std::vector<std::size_t> cuts(items.size() - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng.engine());
  cuts.resize(blocks - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(items.size());
  std::vector<std::vector<std::size_t>> out;
  std::size_t start = 0;
  for (auto c : cuts) {
    std::vector<std::size_t> b(items.begin() + static_cast<std::ptrdiff_t>(start),
                               items.begin() + static_cast<std::ptrdiff_t>(c));
    std::sort(b.begin(), b.end());
    out.push_back(std::move(b));
    start = c;
  }
  return out;
}

std::vector<double> json_vector(const json& j) { return j.get<std::vector<double>>(); }

// Uniform sites, each at least `min_sep` from the others; the box grows
// when the requested spacing would not fit.
SiteSet separated_sites(Rng& rng, std::size_t n, std::size_t d, double extent, double min_sep) {
  const double fit = min_sep * 2.0 * std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d));
  const double box = std::max(extent, fit);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd coords(nn, dd);
  for (Eigen::Index i = 0; i < nn;) {
    for (Eigen::Index j = 0; j < dd; ++j) coords(i, j) = rng.uniform(0.0, box);
    bool ok = true;
    for (Eigen::Index k = 0; k < i && ok; ++k) ok = (coords.row(i) - coords.row(k)).norm() >= min_sep;
    if (ok) ++i;
  }
  return SiteSet(std::move(coords));
}

Eigen::MatrixXd random_spd(Rng& rng, std::size_t p, double ridge) {
  const auto pp = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd a(pp, pp);
  for (Eigen::Index i = 0; i < pp; ++i) {
    for (Eigen::Index j = 0; j < pp; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(p);
  s.diagonal().array() += ridge;
  return 0.5 * (s + s.transpose());
}

bool uses_cosine(const CovModel& model) {
  if (const auto* prop = std::get_if<ProportionalModel>(&model.variant())) {
    return prop->rho.family() == CorrelationFamily::cosine_1d;
  }
  for (const auto& t : std::get<LmcModel>(model.variant()).terms) {
    if (t.rho.family() == CorrelationFamily::cosine_1d) return true;
  }
  return false;
}

std::string model_subject(const CovModel& model) {
  if (const auto* prop = std::get_if<ProportionalModel>(&model.variant())) {
    return "proportional(" + std::string(to_string(prop->rho.family())) + ")";
  }
  return "lmc(" + std::to_string(std::get<LmcModel>(model.variant()).terms.size()) + " terms)";
}

}  // namespace

std::string to_string(Axiom a) {
  switch (a) {
    case Axiom::c1: return "C1";
    case Axiom::c2: return "C2";
    case Axiom::c3: return "C3";
    case Axiom::c4: return "C4";
    case Axiom::sum_to_one: return "sum-to-one";
    case Axiom::theorem2_linearity: return "theorem2-linearity";
    case Axiom::theorem3_forward: return "theorem3-forward";
    case Axiom::theorem3_converse: return "theorem3-converse";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::witness_found: return "witness-found";
  }
  return "?";
}

Axiom parse_axiom(const std::string& name) {
  if (name == "c1") return Axiom::c1;
  if (name == "c2") return Axiom::c2;
  if (name == "c3") return Axiom::c3;
  if (name == "c4") return Axiom::c4;
  if (name == "sum1") return Axiom::sum_to_one;
  if (name == "thm2") return Axiom::theorem2_linearity;
  if (name == "thm3") return Axiom::theorem3_forward;
  throw DomainError("unknown axiom '" + name + "' (expected c1, c2, c3, c4, sum1, thm2 or thm3)");
}

json to_json(const AxiomReport& r) {
  json j;
  j["axiom"] = to_string(r.axiom);
  j["subject"] = r.subject;
  j["verdict"] = to_string(r.verdict);
  j["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
  j["note"] = r.note;
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["trial"] = r.trial ? json(*r.trial) : json(nullptr);
  j["witness"] = r.verdict != Verdict::pass && r.witness ? *r.witness : json(nullptr);
  return j;
}

json method_to_json(const MeanMethod& m) {
  struct Visitor {
    json operator()(const WeightedArithmetic& a) const {
      return {{"name", "arith"}, {"weights", a.weights ? json(*a.weights) : json(nullptr)}};
    }
    json operator()(const NormalizedGeometric&) const { return {{"name", "geom"}}; }
    json operator()(const IlrMean& a) const {
      return {{"name", "ilr"}, {"weights", a.weights ? json(*a.weights) : json(nullptr)}};
    }
    json operator()(const QuasiArithmetic& q) const {
      std::string kind;
      switch (q.phi.kind()) {
        case GeneratingFunction::Kind::identity: kind = "identity"; break;
        case GeneratingFunction::Kind::log: kind = "log"; break;
        case GeneratingFunction::Kind::reciprocal: kind = "reciprocal"; break;
        case GeneratingFunction::Kind::power: kind = "power"; break;
        case GeneratingFunction::Kind::symmetric_sine: kind = "sine"; break;
      }
      return {{"name", "qam"},
              {"phi", {{"kind", kind}, {"parameter", q.phi.parameter()}}},
              {"weights", q.weights ? json(*q.weights) : json(nullptr)}};
    }
    json operator()(const GraphMedian&) const { return {{"name", "graph-median"}}; }
    json operator()(const L1Median& l) const { return {{"name", "l1-median"}, {"tol", l.tol}}; }
  };
  return std::visit(Visitor{}, m);
}

MeanMethod method_from_json(const json& j) {
  const auto name = j.at("name").get<std::string>();
  auto weights = [&]() -> std::optional<std::vector<double>> {
    auto it = j.find("weights");
    if (it == j.end() || it->is_null()) return std::nullopt;
    return json_vector(*it);
  };
  if (name == "arith") return WeightedArithmetic{weights()};
  if (name == "geom") return NormalizedGeometric{};
  if (name == "ilr") return IlrMean{weights()};
  if (name == "qam") {
    const auto& phi = j.at("phi");
    const auto kind = phi.at("kind").get<std::string>();
    const double param = phi.at("parameter").get<double>();
    GeneratingFunction f = GeneratingFunction::identity();
    if (kind == "log") f = GeneratingFunction::log();
    else if (kind == "reciprocal") f = GeneratingFunction::reciprocal();
    else if (kind == "power") f = GeneratingFunction::power(param);
    else if (kind == "sine") f = GeneratingFunction::symmetric_sine(param);
    else if (kind != "identity") throw DomainError("unknown generating function '" + kind + "'");
    return QuasiArithmetic{f, weights()};
  }
  if (name == "graph-median") return GraphMedian{};
  if (name == "l1-median") return L1Median{j.value("tol", 1e-10)};
  throw DomainError("unknown mean method '" + name + "'");
}

MeanMethod make_method(const std::string& name, std::optional<std::vector<double>> weights,
                       const std::optional<std::string>& phi) {
  if (phi && name != "qam") throw DomainError("--phi only applies to the qam method");
  const bool takes_weights = name == "arith" || name == "ilr" || name == "qam";
  if (weights && !takes_weights) throw DomainError("method '" + name + "' does not take weights");
  if (name == "arith") return WeightedArithmetic{std::move(weights)};
  if (name == "geom") return NormalizedGeometric{};
  if (name == "ilr") return IlrMean{std::move(weights)};
  if (name == "qam") {
    return QuasiArithmetic{phi ? GeneratingFunction::parse(*phi) : GeneratingFunction::log(), std::move(weights)};
  }
  if (name == "graph-median") return GraphMedian{};
  if (name == "l1-median") return L1Median{};
  throw DomainError("unknown mean method '" + name + "'");
}

json dataset_to_json(const CompositionalDataset& ds) {
  json rows = json::array();
  for (const auto& r : ds.rows()) rows.push_back(r.values());
  return {{"sites", sites_to_json(ds.sites())}, {"rows", std::move(rows)}};
}

CompositionalDataset dataset_from_json(const json& j) {
  std::vector<Composition> rows;
  for (const auto& r : j.at("rows")) rows.emplace_back(json_vector(r));
  return CompositionalDataset(sites_from_json(j.at("sites")), std::move(rows));
}

json grouping_to_json(const Grouping& g) { return {{"q", g.source_parts()}, {"blocks", g.blocks()}}; }

Grouping grouping_from_json(const json& j) {
  return Grouping(j.at("blocks").get<std::vector<std::vector<std::size_t>>>(), j.at("q").get<std::size_t>());
}

json sites_to_json(const SiteSet& s) {
  json out = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd v = s.site(i);
    out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  return out;
}

SiteSet sites_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty() || rows.front().empty()) throw DomainError("site list is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw DomainError("sites have differing dimensions");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return SiteSet(std::move(m));
}

AxiomReport check_reflexivity(const MeanMethod& method, const Composition& x, std::size_t n) {
  json witness = {{"method", method_to_json(method)}, {"x", x.values()}, {"n", n}};
  AxiomReport r;
  r.axiom = Axiom::c1;
  r.subject = describe(method);
  try {
    const auto m = evaluate(method, repeated(x, n));
    r.residual = half_taxi(m.point, x.parts());
  } catch (const std::exception& e) {
    return failed_with(Axiom::c1, method, e.what(), std::move(witness));
  }
  r.verdict = r.residual <= kExactTol ? Verdict::pass : Verdict::fail;
  r.note = "half-taxi distance between M(x, ..., x) and x";
  r.witness = std::move(witness);
  return r;
}

AxiomReport check_marginal_stability(const MeanMethod& method, const CompositionalDataset& ds, const Grouping& a,
                                     const Grouping& b) {
  if (a.blocks().front() != b.blocks().front()) throw DomainError("groupings must share their first block");
  json witness = {{"method", method_to_json(method)},
                  {"dataset", dataset_to_json(ds)},
                  {"groupings", {grouping_to_json(a), grouping_to_json(b)}}};
  AxiomReport r;
  r.axiom = Axiom::c2;
  r.subject = describe(method);
  double va = 0.0;
  double vb = 0.0;
  try {
    va = evaluate(method, amalgamate(ds, a)).point.front();
    vb = evaluate(method, amalgamate(ds, b)).point.front();
  } catch (const std::exception& e) {
    return failed_with(Axiom::c2, method, e.what(), std::move(witness));
  }
  r.residual = std::abs(va - vb);
  r.verdict = r.residual <= kExactTol ? Verdict::pass : Verdict::fail;
  r.note = "first-block means " + fmt(va) + " and " + fmt(vb);
  witness["values"] = {va, vb};
  r.witness = std::move(witness);
  return r;
}

AxiomReport check_continuity(const MeanMethod& method, const CompositionalDataset& ds,
                             const std::vector<double>& deltas) {
  if (deltas.empty()) throw DomainError("continuity check needs at least one step size");
  json witness = {{"method", method_to_json(method)}, {"dataset", dataset_to_json(ds)}, {"deltas", deltas}};
  const double largest = *std::max_element(deltas.begin(), deltas.end());
  const std::size_t p = ds.parts();
  AxiomReport r;
  r.axiom = Axiom::c3;
  r.subject = describe(method);
  try {
    const auto base = evaluate(method, ds).point;
    std::vector<double> ratios;
    double worst_ratio = 0.0;
    double worst_jump = 0.0;
    json worst_at;
    for (double delta : deltas) {
      double ratio = 0.0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& x = ds.row(i);
        const bool interior = x.strictly_positive();
        std::vector<std::pair<std::string, std::vector<double>>> dirs;
        std::vector<double> centre(p);
        double span = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          centre[k] = 1.0 / static_cast<double>(p) - x[k];
          span = std::max(span, std::abs(centre[k]));
        }
        if (span > 0.0) {
          for (auto& v : centre) v /= span;
          dirs.emplace_back("barycentre", centre);
        }
        for (std::size_t k = 0; k < p; ++k) {
          for (std::size_t l = 0; l < p; ++l) {
            if (k == l) continue;
            std::vector<double> e(p, 0.0);
            e[k] = 1.0;
            e[l] = -1.0;
            dirs.emplace_back("e" + std::to_string(k + 1) + "-e" + std::to_string(l + 1), std::move(e));
          }
        }
        for (const auto& [name, dir] : dirs) {
          bool feasible = true;
          for (std::size_t k = 0; k < p && feasible; ++k) {
            const double v = x[k] + largest * dir[k];
            feasible = interior ? v > 0.0 : v >= 0.0;
          }
          if (!feasible) continue;
          const auto m = evaluate(method, ds.with_row(i, moved(x, dir, delta))).point;
          const double q = max_diff(m, base) / delta;
          if (q > ratio) ratio = q;
          if (q > worst_ratio) {
            worst_ratio = q;
            worst_jump = half_taxi(m, base);
            worst_at = {{"datum", i}, {"direction", name}, {"delta", delta}};
          }
        }
      }
      ratios.push_back(ratio);
    }
    const double threshold = 10.0 * std::max(1.0, ratios.front());
    const double peak = *std::max_element(ratios.begin(), ratios.end());
    r.residual = peak;
    witness["ratios"] = ratios;
    witness["worst"] = worst_at;
    witness["jump"] = worst_jump;
    if (peak > threshold) {
      r.verdict = Verdict::fail;
      r.note = "difference quotient grows from " + fmt(ratios.front()) + " to " + fmt(peak) +
               " as the step shrinks; output jump " + fmt(worst_jump) + " (half-taxi)";
    } else {
      r.verdict = Verdict::pass;
      r.note = "no discontinuity detected; largest difference quotient " + fmt(peak);
    }
  } catch (const std::exception& e) {
    return failed_with(Axiom::c3, method, e.what(), std::move(witness));
  }
  r.witness = std::move(witness);
  return r;
}

AxiomReport check_permutation(const MeanMethod& method, const CompositionalDataset& ds,
                              const std::vector<std::size_t>& perm) {
  json witness = {{"method", method_to_json(method)}, {"dataset", dataset_to_json(ds)}, {"permutation", perm}};
  AxiomReport r;
  r.axiom = Axiom::c4;
  r.subject = describe(method);
  try {
    const auto base = evaluate(method, ds).point;
    r.residual = max_diff(evaluate(method, ds.permuted(perm)).point, base);
  } catch (const std::exception& e) {
    return failed_with(Axiom::c4, method, e.what(), std::move(witness));
  }
  r.verdict = r.residual <= kSymmetryTol ? Verdict::pass : Verdict::fail;
  r.witness = std::move(witness);
  return r;
}

AxiomReport check_symmetry(const MeanMethod& method, const CompositionalDataset& ds, std::size_t trials,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> worst_perm = perm;
  double worst = 0.0;
  try {
    const auto base = evaluate(method, ds).point;
    for (std::size_t t = 0; t < trials; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng.engine());
      const double d = max_diff(evaluate(method, ds.permuted(perm)).point, base);
      if (d > worst || t == 0) {
        worst = std::max(worst, d);
        worst_perm = perm;
      }
    }
  } catch (const std::exception& e) {
    return failed_with(Axiom::c4, method, e.what(),
                       {{"method", method_to_json(method)}, {"dataset", dataset_to_json(ds)}});
  }
  AxiomReport r;
  r.axiom = Axiom::c4;
  r.subject = describe(method);
  r.residual = worst;
  r.verdict = worst <= kSymmetryTol ? Verdict::pass : Verdict::fail;
  r.note = "largest change over " + std::to_string(trials) + " row permutations";
  r.witness = json{{"method", method_to_json(method)},
                   {"dataset", dataset_to_json(ds)},
                   {"permutation", worst_perm},
                   {"trials", trials},
                   {"permutation_seed", seed}};
  return r;
}

AxiomReport check_sum_to_one(const MeanMethod& method, const CompositionalDataset& ds) {
  json witness = {{"method", method_to_json(method)}, {"dataset", dataset_to_json(ds)}};
  AxiomReport r;
  r.axiom = Axiom::sum_to_one;
  r.subject = describe(method);
  try {
    const auto m = evaluate(method, ds);
    const double s = m.raw_component_sum ? *m.raw_component_sum : m.sum();
    r.residual = std::abs(s - 1.0);
    r.note = "parts sum to " + fmt(s);
  } catch (const std::exception& e) {
    return failed_with(Axiom::sum_to_one, method, e.what(), std::move(witness));
  }
  r.verdict = r.residual <= kExactTol ? Verdict::pass : Verdict::fail;
  r.witness = std::move(witness);
  return r;
}

AxiomReport replay(const AxiomReport& report) {
  if (!report.witness) throw DomainError("report has no witness to replay");
  const json& w = *report.witness;
  AxiomReport out;
  switch (report.axiom) {
    case Axiom::c1:
      out = check_reflexivity(method_from_json(w.at("method")), Composition(json_vector(w.at("x"))),
                              w.at("n").get<std::size_t>());
      break;
    case Axiom::c2:
      out = check_marginal_stability(method_from_json(w.at("method")), dataset_from_json(w.at("dataset")),
                                     grouping_from_json(w.at("groupings")[0]), grouping_from_json(w.at("groupings")[1]));
      break;
    case Axiom::c3:
      out = check_continuity(method_from_json(w.at("method")), dataset_from_json(w.at("dataset")),
                             json_vector(w.at("deltas")));
      break;
    case Axiom::c4:
      if (w.contains("trials")) {
        out = check_symmetry(method_from_json(w.at("method")), dataset_from_json(w.at("dataset")),
                             w.at("trials").get<std::size_t>(), w.at("permutation_seed").get<std::uint64_t>());
      } else {
        out = check_permutation(method_from_json(w.at("method")), dataset_from_json(w.at("dataset")),
                                w.at("permutation").get<std::vector<std::size_t>>());
      }
      break;
    case Axiom::sum_to_one:
      out = check_sum_to_one(method_from_json(w.at("method")), dataset_from_json(w.at("dataset")));
      break;
    case Axiom::theorem2_linearity:
      out = theorem2_linearity_probe(method_from_json(w.at("method")), w.at("p").get<std::size_t>(),
                                     w.at("trials").get<std::size_t>(), w.at("seed").get<std::uint64_t>());
      break;
    case Axiom::theorem3_forward:
    case Axiom::theorem3_converse:
      out = theorem3_check(config_from_json(w.at("config")), w.at("seed").get<std::uint64_t>(),
                           w.at("trial").get<std::size_t>());
      break;
  }
  out.seed = report.seed;
  out.trial = report.trial;
  return out;
}

TrialData c2_trial_data(const SweepOptions& opt, std::size_t t, std::size_t rows) {
  Rng rng = Rng::for_trial(opt.seed, t);
  const std::size_t p_out = opt.output_parts ? opt.output_parts : 3 + rng.index(3);
  const std::size_t q = p_out + 1 + rng.index(2);
  auto ds = random_dataset(rng, rows, q, 1.0, opt.min_part);
  std::vector<std::size_t> idx(q);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  const std::size_t first_size = 1 + rng.index(q - (p_out - 1));
  std::vector<std::size_t> first(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(first_size));
  std::sort(first.begin(), first.end());
  const std::vector<std::size_t> rest(idx.begin() + static_cast<std::ptrdiff_t>(first_size), idx.end());
  auto make = [&]() {
    auto blocks = random_partition(rng, rest, p_out - 1);
    blocks.insert(blocks.begin(), first);
    return Grouping(std::move(blocks), q);
  };
  Grouping a = make();
  Grouping b = make();
  return {std::move(ds), std::move(a), std::move(b)};
}

std::vector<AxiomReport> sweep(Axiom axiom, const MeanMethod& method, const SweepOptions& opt) {
  if (opt.min_rows == 0 || opt.max_rows < opt.min_rows) throw DomainError("invalid row range for a sweep");
  std::optional<std::size_t> fixed_rows;
  std::visit(
      [&](const auto& m) {
        if constexpr (requires { m.weights; }) {
          if (m.weights) fixed_rows = m.weights->size();
        }
      },
      method);
  std::vector<AxiomReport> out;
  out.reserve(opt.trials);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Rng rng = Rng::for_trial(opt.seed, t);
    const std::size_t rows = fixed_rows ? *fixed_rows : opt.min_rows + rng.index(opt.max_rows - opt.min_rows + 1);
    AxiomReport r;
    switch (axiom) {
      case Axiom::c1:
        r = check_reflexivity(method, random_dirichlet(rng, opt.parts, 1.0, opt.min_part), rows);
        break;
      case Axiom::c2: {
        auto data = c2_trial_data(opt, t, rows);
        r = check_marginal_stability(method, data.ds, *data.a, *data.b);
        break;
      }
      case Axiom::c3:
        r = check_continuity(method, random_dataset(rng, rows, opt.parts, 1.0, opt.min_part));
        break;
      case Axiom::c4: {
        auto ds = random_dataset(rng, rows, opt.parts, 1.0, opt.min_part);
        r = check_symmetry(method, ds, 10, rng.engine()());
        break;
      }
      case Axiom::sum_to_one:
        r = check_sum_to_one(method, random_dataset(rng, rows, opt.parts, 1.0, opt.min_part));
        break;
      default:
        throw DomainError("axiom " + to_string(axiom) + " is not a per-dataset sweep");
    }
    r.seed = opt.seed;
    r.trial = t;
    out.push_back(std::move(r));
  }
  return out;
}

const AxiomReport& worst(const std::vector<AxiomReport>& reports) {
  if (reports.empty()) throw DomainError("no reports");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].residual > reports[best].residual) best = i;
  }
  return reports[best];
}

AxiomReport theorem2_linearity_probe(const MeanMethod& method, std::size_t p, std::size_t trials,
                                     std::uint64_t seed) {
  if (p < 3) throw DomainError("linearity probe needs p >= 3");
  std::size_t n = 4;
  std::visit(
      [&](const auto& m) {
        if constexpr (requires { m.weights; }) {
          if (m.weights) n = m.weights->size();
        }
      },
      method);
  json witness = {{"method", method_to_json(method)}, {"p", p}, {"trials", trials}, {"seed", seed}};
  AxiomReport r;
  r.axiom = Axiom::theorem2_linearity;
  r.subject = describe(method);
  r.seed = seed;

  SweepOptions pre;
  pre.seed = seed;
  pre.trials = std::min<std::size_t>(trials, 200);
  pre.min_rows = pre.max_rows = n;
  pre.parts = p;
  pre.output_parts = p;
  for (Axiom ax : {Axiom::c1, Axiom::c2}) {
    const auto reports = sweep(ax, method, pre);
    for (const auto& rep : reports) {
      if (rep.verdict != Verdict::pass) {
        r.verdict = Verdict::fail;
        r.residual = rep.residual;
        r.note = "precondition failed: " + to_string(ax) + " does not hold (" + rep.note +
                 "), so the linearity probe is not applicable";
        witness["precondition"] = to_json(rep);
        witness["precondition"]["witness"] = rep.witness ? *rep.witness : json(nullptr);
        r.witness = std::move(witness);
        return r;
      }
    }
  }

  const std::size_t m = std::max(trials, 3 * (n + 1));
  const auto mm = static_cast<Eigen::Index>(m);
  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<CompositionalDataset> data;
  std::vector<std::vector<double>> outputs;
  try {
    for (std::size_t t = 0; t < m; ++t) {
      Rng rng(seed, kProbeStream + t);
      data.push_back(random_dataset(rng, n, p, 1.0, 0.01));
      outputs.push_back(evaluate(method, data.back()).point);
    }
  } catch (const std::exception& e) {
    return failed_with(Axiom::theorem2_linearity, method, e.what(), std::move(witness));
  }
  Eigen::VectorXd first_lambda;
  double residual = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    Eigen::MatrixXd x(mm, nn + 1);
    Eigen::VectorXd y(mm);
    for (Eigen::Index t = 0; t < mm; ++t) {
      for (Eigen::Index i = 0; i < nn; ++i) x(t, i) = data[static_cast<std::size_t>(t)].row(static_cast<std::size_t>(i))[k];
      x(t, nn) = 1.0;
      y(t) = outputs[static_cast<std::size_t>(t)][k];
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    residual = std::max(residual, (x * beta - y).cwiseAbs().maxCoeff());
    residual = std::max(residual, std::abs(beta(nn)));
    const Eigen::VectorXd lambda = beta.head(nn);
    if (k == 0) {
      first_lambda = lambda;
      residual = std::max(residual, std::abs(lambda.sum() - 1.0));
    } else {
      residual = std::max(residual, (lambda - first_lambda).cwiseAbs().maxCoeff());
    }
  }
  r.residual = residual;
  r.verdict = residual <= kSolverTol ? Verdict::pass : Verdict::fail;
  witness["lambda"] = std::vector<double>(first_lambda.data(), first_lambda.data() + first_lambda.size());
  r.note = r.verdict == Verdict::pass ? "outputs are one weighted average of the part columns"
                                      : "outputs are not a common linear function of the part columns";
  r.witness = std::move(witness);
  return r;
}

json config_to_json(const CovConfig& c) { return {{"model", model_to_json(c.model)}, {"sites", sites_to_json(c.sites)}}; }

CovConfig config_from_json(const json& j) {
  return {model_from_json(j.at("model"), "witness"), sites_from_json(j.at("sites"))};
}

CovConfig random_proportional_config(Rng& rng) {
  const std::size_t p = 2 + rng.index(4);
  const std::size_t n = 2 + rng.index(9);
  const std::size_t d = 1 + rng.index(3);
  static constexpr CorrelationFamily kFamilies[] = {CorrelationFamily::exponential, CorrelationFamily::gaussian,
                                                     CorrelationFamily::spherical, CorrelationFamily::nugget};
  const auto family = kFamilies[rng.index(4)];
  // Gaussian correlation matrices are near singular once sites sit well
  // inside one range of each other.
  const bool gaussian = family == CorrelationFamily::gaussian;
  const double range = gaussian ? rng.uniform(0.3, 1.0) : rng.uniform(0.3, 2.5);
  auto sigma = random_spd(rng, p, 0.1);
  auto sites = gaussian ? separated_sites(rng, n, d, 10.0, range) : random_sites(rng, n, d, 10.0);
  return {CovModel::proportional(std::move(sigma), CorrelationFunction(family, range)), std::move(sites)};
}

CovConfig random_lmc_config(Rng& rng) {
  const std::size_t p = 2 + rng.index(4);
  const std::size_t n = 3 + rng.index(8);
  const std::size_t d = 1 + rng.index(3);
  const double r1 = rng.uniform(0.3, 1.0);
  const double r2 = r1 * rng.uniform(4.0, 8.0);
  std::vector<LmcTerm> terms;
  terms.push_back({random_spd(rng, p, 0.0), CorrelationFunction(CorrelationFamily::exponential, r1)});
  terms.push_back({random_spd(rng, p, 0.0), CorrelationFunction(CorrelationFamily::exponential, r2)});
  auto sites = random_sites(rng, n, d, 10.0);
  return {CovModel::lmc(std::move(terms)), std::move(sites)};
}

CokrigingCheck check_cokriging(const CovConfig& config, Rng& rng) {
  const auto c = build_block_matrix(config.model, config.sites);
  const auto sol = cokrige_means(c);
  const std::size_t n = c.sites();
  const std::size_t p = c.parts();
  CokrigingCheck out;
  out.equality = weights_equal_across_variables(sol, 1e-9);
  out.single_gap = std::numeric_limits<double>::quiet_NaN();
  if (const auto* prop = std::get_if<ProportionalModel>(&config.model.variant())) {
    const auto single = krige_mean_single(correlation_matrix(prop->rho, config.sites));
    out.single_gap = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      out.single_gap = std::max(out.single_gap, (sol.weights(k, k) - single.lambda).cwiseAbs().maxCoeff());
    }
  }
  const Eigen::MatrixXd j = kronecker(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)),
                                      Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1));
  out.stationarity = max_abs(c.matrix() * sol.lambda - j * sol.mu) / max_abs(c.matrix());
  out.unbiasedness = unbiasedness_residual(sol);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(c.matrix());
  const Eigen::MatrixXd m = j.transpose() * lu.solve(j);
  out.mu_identity = max_abs(sol.mu - m.fullPivLu().inverse()) / max_abs(sol.mu);
  out.nonnegative = weights_nonnegative(sol);
  if (out.nonnegative) {
    std::vector<Composition> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(random_dirichlet(rng, p));
    const auto est = apply_weights(sol, CompositionalDataset(config.sites, std::move(rows)));
    out.in_simplex = est.minCoeff() >= -1e-12 && est.maxCoeff() <= 1.0 + 1e-12;
  }
  return out;
}

namespace {

std::pair<AxiomReport, CokrigingCheck> theorem3_eval(const CovConfig& config, std::uint64_t seed, std::size_t trial) {
  Rng rng(seed, kCheckStream + trial);
  AxiomReport r;
  r.subject = model_subject(config.model);
  r.seed = seed;
  r.trial = trial;
  const bool proportional = config.model.is_proportional();
  r.axiom = proportional ? Axiom::theorem3_forward : Axiom::theorem3_converse;
  json witness = {{"config", config_to_json(config)}, {"seed", seed}, {"trial", trial}};
  CokrigingCheck chk;
  try {
    chk = check_cokriging(config, rng);
  } catch (const std::exception& e) {
    r.verdict = Verdict::fail;
    r.residual = kInf;
    r.note = e.what();
    r.witness = std::move(witness);
    return {r, chk};
  }
  const bool identities = chk.stationarity <= 1e-8 && chk.unbiasedness <= 1e-9 && chk.mu_identity <= 1e-8;
  r.residual = chk.equality.max_deviation;
  witness["max_deviation"] = chk.equality.max_deviation;
  witness["stationarity"] = chk.stationarity;
  witness["unbiasedness"] = chk.unbiasedness;
  witness["mu_identity"] = chk.mu_identity;
  if (proportional) {
    witness["single_gap"] = chk.single_gap;
    const bool ok = chk.equality.equal && chk.single_gap <= 1e-10 && identities;
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    r.note = ok ? "weights equal across variables and equal to the single-variable weights"
                : "weights deviate by " + fmt(chk.equality.max_deviation) + ", single-variable gap " +
                      fmt(chk.single_gap);
  } else if (!identities) {
    r.verdict = Verdict::fail;
    r.note = "cokriging identities violated";
  } else if (chk.equality.max_deviation > 1e-6) {
    r.verdict = Verdict::witness_found;
    r.note = "weights differ across variables by " + fmt(chk.equality.max_deviation);
  } else {
    r.verdict = Verdict::pass;
    r.note = "weights agree within 1e-6";
  }
  r.witness = std::move(witness);
  return {r, chk};
}

Theorem3Sweep run_sweep(std::size_t trials, std::uint64_t seed, const std::function<CovConfig(Rng&)>& make) {
  Theorem3Sweep out;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::for_trial(seed, t);
    const auto config = make(rng);
    auto [report, chk] = theorem3_eval(config, seed, t);
    const bool forward = report.axiom == Axiom::theorem3_forward;
    if (forward ? report.verdict == Verdict::pass : chk.equality.max_deviation > 1e-6) ++out.hits;
    if (!forward && (!out.witness_trial || chk.equality.max_deviation > out.max_deviation)) {
      out.witness_trial = t;
    }
    out.max_deviation = std::max(out.max_deviation, chk.equality.max_deviation);
    out.reports.push_back(std::move(report));
    out.checks.push_back(chk);
  }
  out.fraction = trials ? static_cast<double>(out.hits) / static_cast<double>(trials) : 0.0;
  return out;
}

}  // namespace

AxiomReport theorem3_check(const CovConfig& config, std::uint64_t seed, std::size_t trial) {
  return theorem3_eval(config, seed, trial).first;
}

Theorem3Sweep theorem3_sweep(bool proportional, std::size_t trials, std::uint64_t seed) {
  return run_sweep(trials, seed, proportional ? random_proportional_config : random_lmc_config);
}

Theorem3Sweep theorem3_sweep(const CovModel& model, std::size_t trials, std::uint64_t seed) {
  const bool cosine = uses_cosine(model);
  return run_sweep(trials, seed, [&](Rng& rng) {
    const std::size_t n = 2 + rng.index(9);
    const std::size_t d = cosine ? 1 : 1 + rng.index(3);
    return CovConfig{model, random_sites(rng, n, d, 10.0)};
  });
}

std::optional<GraphMedianJump> find_graph_median_jump(std::uint64_t seed, std::size_t max_trials, double delta,
                                                      double jump) {
  for (std::size_t t = 0; t < max_trials; ++t) {
    Rng rng = Rng::for_trial(seed, t);
    const std::size_t n = 4 + rng.index(4);
    const std::size_t p = 3;
    const auto ds = random_dataset(rng, n, p, 1.0, 0.01);
    const std::size_t i = rng.index(n);
    const std::size_t from = rng.index(p);
    const std::size_t to = (from + 1 + rng.index(p - 1)) % p;
    std::vector<double> dir(p, 0.0);
    dir[to] = 1.0;
    dir[from] = -1.0;
    const auto& x = ds.row(i);
    const double top = x[from] - 1e-3;
    if (top <= 0.0) continue;
    auto median_at = [&](double s) { return graph_median(ds.with_row(i, moved(x, dir, s))).point; };
    double lo = 0.0;
    double hi = top;
    auto m_lo = median_at(lo);
    auto m_hi = median_at(hi);
    if (half_taxi(m_lo, m_hi) <= jump) continue;
    bool split = false;
    while (hi - lo > 0.25 * delta) {
      const double mid = 0.5 * (lo + hi);
      auto m_mid = median_at(mid);
      if (half_taxi(m_lo, m_mid) > jump) {
        hi = mid;
        m_hi = std::move(m_mid);
      } else if (half_taxi(m_mid, m_hi) > jump) {
        lo = mid;
        m_lo = std::move(m_mid);
      } else {
        split = true;
        break;
      }
    }
    if (split) continue;
    const auto before_row = moved(x, dir, lo);
    const auto after_row = moved(before_row, dir, delta);
    GraphMedianJump out{seed, t, i, from, to, ds.with_row(i, before_row), ds.with_row(i, after_row), 0.0};
    out.jump = half_taxi(graph_median(out.before).point, graph_median(out.after).point);
    if (out.jump > jump) return out;
  }
  return std::nullopt;
}

std::optional<NegativeWeightTriple> find_negative_weight_triple(std::uint64_t seed, std::size_t max_trials,
                                                                double margin) {
  for (std::size_t t = 0; t < max_trials; ++t) {
    Rng rng = Rng::for_trial(seed, t);
    const double gap = rng.uniform(0.05, 0.5);
    const double far = rng.uniform(1.0, 4.0);
    const double range = rng.uniform(0.5, 2.0);
    SiteSet sites{{0.0}, {gap}, {far}};
    const CorrelationFunction rho(CorrelationFamily::gaussian, range);
    auto r = correlation_matrix(rho, sites);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) continue;
    const auto single = krige_mean_single(r);
    if (single.lambda.minCoeff() < -margin) return NegativeWeightTriple{seed, t, std::move(sites), range, std::move(r)};
  }
  return std::nullopt;
}

}  // namespace sgeo
