#include "sgeo/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sgeo/axiom_lab.hpp"
#include "sgeo/csv.hpp"
#include "sgeo/datagen.hpp"
#include "sgeo/error.hpp"
#include "sgeo/kriging.hpp"
#include "sgeo/means.hpp"
#include "sgeo/model_io.hpp"
#include "sgeo/transforms.hpp"

namespace sgeo::cli {

using nlohmann::json;

namespace {

constexpr const char* kSeedEnv = "SIMPLEX_GEOSTAT_SEED";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  std::string seed_source = "default";
  std::size_t trials = 100;
  double tol = 0.0;
  bool tol_given = false;
  std::string format = "json";
  std::string out_path;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    const std::string field = text.substr(start, end - start);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
      throw UsageError(std::string(what) + ": '" + field + "' is not a number");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json rows_of(const Eigen::MatrixXd& m) { return matrix_to_json(m); }

void emit(const json& doc, const Options& opt, std::ostream& out) {
  const json rounded = round_numbers(doc);
  std::ostringstream text;
  if (opt.format == "json") {
    text << rounded.dump(2) << '\n';
  } else {
    for (const auto& section : {"config", "result"}) {
      if (!rounded.contains(section)) continue;
      text << "[" << section << "]\n";
      for (const auto& [key, value] : rounded[section].items()) text << "  " << key << ": " << value.dump() << '\n';
    }
  }
  if (opt.out_path.empty()) {
    out << text.str();
    return;
  }
  std::ofstream file(opt.out_path);
  if (!file) throw InputError("cannot write '" + opt.out_path + "'");
  file << text.str();
}

json base_config(const std::string& subcommand, const Options& opt) {
  return {{"subcommand", subcommand},
          {"seed", opt.seed},
          {"seed_source", opt.seed_source},
          {"trials", opt.trials},
          {"tol", opt.tol_given ? json(opt.tol) : json(nullptr)},
          {"format", opt.format},
          {"out", opt.out_path.empty() ? json("-") : json(opt.out_path)}};
}

json kkt_json(const KktResiduals& k) {
  return {{"stationarity", k.stationarity},
          {"primal", k.primal},
          {"dual", k.dual},
          {"complementarity", k.complementarity}};
}

std::string layout_name(WeightLayout l) {
  switch (l) {
    case WeightLayout::shared: return "shared";
    case WeightLayout::stacked: return "stacked";
    case WeightLayout::per_part: return "per-part";
  }
  return "?";
}

KrigingSolution per_variable_single(const BlockCovMatrix& c) {
  KrigingSolution sol;
  sol.layout = WeightLayout::per_part;
  sol.n = c.sites();
  sol.p = c.parts();
  const auto nn = static_cast<Eigen::Index>(sol.n);
  const auto pp = static_cast<Eigen::Index>(sol.p);
  sol.lambda.resize(nn, pp);
  sol.mu.resize(pp, 1);
  Eigen::VectorXd var(pp);
  double stat = 0.0;
  for (Eigen::Index k = 0; k < pp; ++k) {
    const Eigen::MatrixXd ckk = c.block(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    const auto s = krige_mean_single(ckk);
    sol.lambda.col(k) = s.lambda;
    sol.mu(k, 0) = s.mu;
    var(k) = s.variance;
    stat = std::max(stat, (ckk * s.lambda - Eigen::VectorXd::Constant(nn, s.mu)).cwiseAbs().maxCoeff());
  }
  sol.variance = var;
  sol.kkt.stationarity = stat;
  sol.kkt.primal = unbiasedness_residual(sol);
  return sol;
}

int cmd_mean(const Options& opt, const std::string& data, const std::string& method_name,
             const std::string& weights_text, const std::string& phi_text, bool lax, std::ostream& out) {
  std::optional<std::vector<double>> weights;
  if (!weights_text.empty()) weights = parse_list(weights_text, "--weights");
  std::optional<std::string> phi;
  if (!phi_text.empty()) phi = phi_text;
  MeanMethod method = make_method(method_name, weights, phi);
  if (opt.tol_given) {
    if (auto* l1 = std::get_if<L1Median>(&method)) l1->tol = opt.tol;
  }
  const auto ds = read_dataset_csv(std::filesystem::path(data), !lax);
  const auto est = evaluate(method, ds);
  json config = base_config("mean", opt);
  config["data"] = data;
  config["method"] = method_to_json(method);
  config["strict"] = !lax;
  json result = {{"method", est.method},
                 {"point", est.point},
                 {"sum", est.sum()},
                 {"in_simplex", est.in_simplex()},
                 {"weights_used", est.weights_used ? json(*est.weights_used) : json(nullptr)},
                 {"raw_component_sum", est.raw_component_sum ? json(*est.raw_component_sum) : json(nullptr)}};
  emit({{"config", config}, {"result", result}}, opt, out);
  return kOk;
}

int cmd_transform(const Options& opt, const std::string& mode, const std::string& data, std::ostream& out) {
  json config = base_config("transform", opt);
  config["mode"] = mode;
  config["data"] = data;
  std::vector<std::string> header;
  json rows = json::array();
  if (mode == "ilr") {
    const auto ds = read_dataset_csv(std::filesystem::path(data));
    for (std::size_t j = 0; j < ds.sites().dim(); ++j) header.push_back("s" + std::to_string(j + 1));
    for (std::size_t k = 1; k < ds.parts(); ++k) header.push_back("u" + std::to_string(k));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Eigen::VectorXd s = ds.sites().site(i);
      std::vector<double> row(s.data(), s.data() + s.size());
      const auto u = ilr(ds.row(i));
      for (double v : u.coords()) row.push_back(v);
      rows.push_back(row);
    }
  } else {
    std::ifstream in(data);
    if (!in) throw InputError("cannot open '" + data + "'");
    const auto table = read_csv_table(in, data);
    const auto cols = parse_header(table, 'u', 1, data);
    if (table.rows.empty()) throw InputError(data + ": empty dataset");
    const auto sites = sites_from_table(table, cols, data);
    for (std::size_t j = 0; j < cols.sites; ++j) header.push_back("s" + std::to_string(j + 1));
    for (std::size_t k = 0; k <= cols.values; ++k) header.push_back("p" + std::to_string(k + 1));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      std::vector<double> row(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(cols.sites));
      const auto x = ilr_inv(IlrCoordinates(std::vector<double>(r.begin() + static_cast<std::ptrdiff_t>(cols.sites), r.end())));
      for (double v : x.values()) row.push_back(v);
      rows.push_back(row);
    }
    (void)sites;
  }
  if (opt.format == "table") {
    std::ostringstream text;
    for (std::size_t c = 0; c < header.size(); ++c) text << (c ? "," : "") << header[c];
    text << '\n';
    char buf[40];
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.12g", r[c].get<double>());
        text << (c ? "," : "") << buf;
      }
      text << '\n';
    }
    if (opt.out_path.empty()) {
      out << text.str();
    } else {
      std::ofstream file(opt.out_path);
      if (!file) throw InputError("cannot write '" + opt.out_path + "'");
      file << text.str();
    }
    return kOk;
  }
  emit({{"config", config}, {"result", {{"header", header}, {"rows", rows}}}}, opt, out);
  return kOk;
}

int cmd_krige(const Options& opt, const std::string& model_path, const std::string& sites_path,
              const std::string& data_path, const std::string& mode, std::ostream& out) {
  const auto model = read_model_json(model_path);
  std::optional<CompositionalDataset> ds;
  if (!data_path.empty()) ds = read_dataset_csv(std::filesystem::path(data_path));
  if (sites_path.empty() && !ds) throw UsageError("krige needs --sites or --data");
  const SiteSet sites = sites_path.empty() ? ds->sites() : read_sites_csv(std::filesystem::path(sites_path));
  if (ds) {
    if (ds->size() != sites.size()) throw DomainError("--data and --sites list different numbers of sites");
    if (ds->parts() != model.parts()) throw DomainError("data part count differs from the model's");
  }
  if (mode == "walvoort" && !ds) throw UsageError("walvoort mode needs --data");
  const double tol = opt.tol_given ? opt.tol : 1e-9;

  const auto c = build_block_matrix(model, sites);
  KrigingSolution sol;
  if (mode == "single") sol = per_variable_single(c);
  else if (mode == "cokrige") sol = cokrige_means(c);
  else if (mode == "nonneg") sol = nonneg_cokrige_means(c);
  else sol = walvoort_compositional_krige(c, *ds);

  const auto eq = weights_equal_across_variables(sol, tol);
  json config = base_config("krige", opt);
  config["model"] = model_to_json(model);
  config["sites"] = sites_path.empty() ? json(nullptr) : json(sites_path);
  config["data"] = data_path.empty() ? json(nullptr) : json(data_path);
  config["mode"] = mode;
  config["weights_tol"] = tol;
  json result = {{"layout", layout_name(sol.layout)},
                 {"lambda", sol.layout == WeightLayout::shared ? vec(sol.lambda.col(0)) : rows_of(sol.lambda)},
                 {"mu", rows_of(sol.mu)},
                 {"alpha", sol.alpha ? vec(*sol.alpha) : json(nullptr)},
                 {"active_set", sol.active_set},
                 {"variance", sol.variance ? vec(*sol.variance) : json(nullptr)},
                 {"kkt_residuals", kkt_json(sol.kkt)},
                 {"unbiasedness", unbiasedness_residual(sol)},
                 {"weights_equal", eq.equal},
                 {"max_deviation", eq.max_deviation}};
  if (ds) {
    const Eigen::VectorXd est = sol.estimates ? *sol.estimates : apply_weights(sol, *ds);
    result["estimates"] = vec(est);
    result["estimates_in_simplex"] = est.minCoeff() >= -1e-12 && est.maxCoeff() <= 1.0 + 1e-12 &&
                                     std::abs(est.sum() - 1.0) <= 1e-10;
  } else {
    result["estimates"] = nullptr;
    result["estimates_in_simplex"] = nullptr;
  }
  emit({{"config", config}, {"result", result}}, opt, out);
  return kOk;
}

int cmd_check(const Options& opt, const std::string& axiom_name, const std::string& method_name,
              const std::string& weights_text, const std::string& phi_text, const std::string& model_path,
              std::size_t parts, bool parts_given, std::ostream& out) {
  const Axiom axiom = parse_axiom(axiom_name);
  json config = base_config("check", opt);
  config["axiom"] = axiom_name;
  config["parts"] = parts;
  std::vector<AxiomReport> reports;
  json summary;
  if (axiom == Axiom::theorem3_forward) {
    if (!method_name.empty()) throw UsageError("--axiom thm3 takes --model, not --method");
    Theorem3Sweep sw;
    if (!model_path.empty()) {
      const auto model = read_model_json(model_path);
      config["model"] = model_to_json(model);
      sw = theorem3_sweep(model, opt.trials, opt.seed);
    } else {
      config["model"] = "random proportional";
      sw = theorem3_sweep(true, opt.trials, opt.seed);
    }
    reports = std::move(sw.reports);
    summary["max_deviation"] = sw.max_deviation;
    summary["hit_fraction"] = sw.fraction;
  } else {
    if (method_name.empty()) throw UsageError("--axiom " + axiom_name + " needs --method");
    if (!model_path.empty()) throw UsageError("--model only applies to --axiom thm3");
    std::optional<std::vector<double>> weights;
    if (!weights_text.empty()) weights = parse_list(weights_text, "--weights");
    std::optional<std::string> phi;
    if (!phi_text.empty()) phi = phi_text;
    const auto method = make_method(method_name, weights, phi);
    config["method"] = method_to_json(method);
    if (axiom == Axiom::theorem2_linearity) {
      reports.push_back(theorem2_linearity_probe(method, std::max<std::size_t>(parts, 3), opt.trials, opt.seed));
    } else {
      SweepOptions so;
      so.seed = opt.seed;
      so.trials = opt.trials;
      so.parts = parts;
      if (axiom == Axiom::c2 && parts_given) so.output_parts = parts;
      reports = sweep(axiom, method, so);
    }
  }
  std::size_t pass = 0, fail = 0, witness = 0;
  json arr = json::array();
  for (const auto& r : reports) {
    pass += r.verdict == Verdict::pass;
    fail += r.verdict == Verdict::fail;
    witness += r.verdict == Verdict::witness_found;
    arr.push_back(to_json(r));
  }
  summary["trials"] = reports.size();
  summary["pass"] = pass;
  summary["fail"] = fail;
  summary["witness_found"] = witness;
  emit({{"config", config}, {"result", {{"summary", summary}, {"reports", arr}}}}, opt, out);
  return fail > 0 ? kFailed : kOk;
}

int cmd_simulate(const Options& opt, bool seed_flag, const std::string& spec_path, std::ostream& out) {
  const json raw = parse_json_text(read_text_file(spec_path), spec_path);
  GeneratorSpec spec = spec_from_json(raw, spec_path);
  std::string seed_source = "spec";
  if (seed_flag || !raw.contains("seed")) {
    spec.seed = opt.seed;
    seed_source = opt.seed_source;
  }
  const auto sites = gen_sites(spec);
  const auto ds = gen_compositions(spec, sites);
  json config = base_config("simulate", opt);
  config["seed"] = spec.seed;
  config["seed_source"] = seed_source;
  config["spec"] = spec_to_json(spec);
  std::ostringstream csv;
  csv << "# " << round_numbers(config).dump() << '\n';
  write_dataset_csv(ds, csv);
  if (opt.out_path.empty()) {
    out << csv.str();
    return kOk;
  }
  std::ofstream file(opt.out_path);
  if (!file) throw InputError("cannot write '" + opt.out_path + "'");
  file << csv.str();
  Options to_stdout = opt;
  to_stdout.out_path.clear();
  emit({{"config", config}, {"result", {{"out", opt.out_path}, {"n", ds.size()}, {"p", ds.parts()}, {"d", sites.dim()}}}},
       to_stdout, out);
  return kOk;
}

int cmd_covmodel(const Options& opt, const std::string& model_path, const std::string& sites_path, std::ostream& out) {
  const auto model = read_model_json(model_path);
  const SiteSet sites = sites_path.empty() ? SiteSet{{0.0}} : read_sites_csv(std::filesystem::path(sites_path));
  const auto report = validate_model(model, sites);
  auto chol = [](const CholeskyDiagnostics& d) {
    return json{{"success", d.success},
                {"min_pivot", d.min_pivot},
                {"failed_at", d.failed_at ? json(*d.failed_at) : json(nullptr)}};
  };
  json terms = json::array();
  for (const auto& t : report.terms) {
    terms.push_back({{"name", t.name}, {"ok", t.ok}, {"min_eigenvalue", t.min_eigenvalue}, {"cholesky", chol(t.cholesky)}});
  }
  json config = base_config("covmodel", opt);
  config["model_file"] = model_path;
  config["sites"] = sites_path.empty() ? json(nullptr) : json(sites_path);
  json result = {{"model", model_to_json(model)},
                 {"parts", model.parts()},
                 {"valid", report.valid},
                 {"block", chol(report.block)},
                 {"terms", terms},
                 {"issues", report.issues}};
  emit({{"config", config}, {"result", result}}, opt, out);
  return report.valid ? kOk : kFailed;
}

}  // namespace

json round_numbers(const json& j, int digits) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::strtod(buf, nullptr);
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(round_numbers(v, digits));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_numbers(v, digits);
    return out;
  }
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Means, log-ratio transforms and kriging of the mean for compositional data", "sgeo"};
  app.fallthrough();
  app.require_subcommand(1);

  Options opt;
  auto* seed_opt = app.add_option("--seed", opt.seed, "Random seed (default 0, or $SIMPLEX_GEOSTAT_SEED)");
  app.add_option("--trials", opt.trials, "Number of random trials")->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tol", opt.tol, "Tolerance (l1-median convergence, kriging weight equality)");
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--out", opt.out_path, "Output path (default stdout)");

  std::string data, method, weights, phi, model, sites, mode, axiom, spec;
  bool lax = false;
  std::size_t parts = 4;

  auto* mean = app.add_subcommand("mean", "Estimate the centre of a compositional dataset");
  mean->add_option("--data", data, "Dataset CSV (s1..sd,p1..pp)")->required();
  mean->add_option("--method", method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"arith", "geom", "ilr", "qam", "graph-median", "l1-median"}));
  mean->add_option("--weights", weights, "Comma-separated weights summing to one");
  mean->add_option("--phi", phi, "Generating function for qam: identity, log, reciprocal, power:A, sine:A");
  mean->add_flag("--lax", lax, "Close rows instead of rejecting sums off by more than 1e-9");

  auto* transform = app.add_subcommand("transform", "Isometric log-ratio transform or its inverse");
  transform->add_option("mode", mode, "ilr or ilr-inv")->required()->check(CLI::IsMember({"ilr", "ilr-inv"}));
  transform->add_option("--data", data, "Input CSV (p columns for ilr, u columns for ilr-inv)")->required();

  auto* krige = app.add_subcommand("krige", "Kriging of the mean");
  krige->add_option("--model", model, "Covariance model JSON")->required();
  krige->add_option("--sites", sites, "Sites CSV");
  krige->add_option("--data", data, "Dataset CSV");
  krige->add_option("--mode", mode, "Solver")
      ->required()
      ->check(CLI::IsMember({"single", "cokrige", "nonneg", "walvoort"}));

  auto* check = app.add_subcommand("check", "Empirical axiom and theorem checks");
  check->add_option("--axiom", axiom, "c1, c2, c3, c4, sum1, thm2 or thm3")->required();
  check->add_option("--method", method, "Estimator under test");
  check->add_option("--weights", weights, "Comma-separated weights summing to one");
  check->add_option("--phi", phi, "Generating function for qam");
  check->add_option("--model", model, "Covariance model JSON (thm3)");
  auto* parts_opt = check->add_option("--parts", parts, "Parts of generated compositions")->check(CLI::Range(2, 64));

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--spec", spec, "Generator spec JSON")->required();

  auto* covmodel = app.add_subcommand("covmodel", "Validate and echo a covariance model");
  covmodel->add_option("--model", model, "Covariance model JSON")->required();
  covmodel->add_option("--sites", sites, "Sites CSV for the block-matrix check");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (seed_opt->count() > 0) {
      opt.seed_source = "flag";
    } else if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
      const std::string_view text(env);
      const auto res = std::from_chars(text.data(), text.data() + text.size(), opt.seed);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer");
      }
      opt.seed_source = "env";
    }
    opt.tol_given = tol_opt->count() > 0;
    if (opt.tol_given && !(opt.tol > 0.0)) throw UsageError("--tol must be positive");

    if (*mean) return cmd_mean(opt, data, method, weights, phi, lax, out);
    if (*transform) return cmd_transform(opt, mode, data, out);
    if (*krige) return cmd_krige(opt, model, sites, data, mode, out);
    if (*check) return cmd_check(opt, axiom, method, weights, phi, model, parts, parts_opt->count() > 0, out);
    if (*simulate) return cmd_simulate(opt, seed_opt->count() > 0, spec, out);
    if (*covmodel) return cmd_covmodel(opt, model, sites, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidModelError& e) {
    err << "invalid model: " << e.what() << '\n';
    return kFailed;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kFailed;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << "error: no subcommand\n";
  return kUsage;
}

}  // namespace sgeo::cli
