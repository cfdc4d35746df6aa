#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgeo/covariance.hpp"
#include "sgeo/datagen.hpp"
#include "sgeo/kriging.hpp"
#include "sgeo/means.hpp"

namespace sgeo {

enum class Axiom { c1, c2, c3, c4, sum_to_one, theorem2_linearity, theorem3_forward, theorem3_converse };
enum class Verdict { pass, fail, witness_found };

std::string to_string(Axiom a);
std::string to_string(Verdict v);
Axiom parse_axiom(const std::string& name);

/// Outcome of one check. Fail and witness-found entries carry a witness
/// with every input needed to replay the check.
struct AxiomReport {
  Axiom axiom = Axiom::c1;
  std::string subject;  // method or model descriptor
  Verdict verdict = Verdict::pass;
  double residual = 0.0;
  std::optional<nlohmann::json> witness;
  std::string note;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trial;
};

nlohmann::json to_json(const AxiomReport& r);

// JSON forms of the inputs that witnesses refer to.
nlohmann::json method_to_json(const MeanMethod& m);
MeanMethod method_from_json(const nlohmann::json& j);
/// Method from CLI-style arguments: name in {arith, geom, ilr, qam,
/// graph-median, l1-median}, optional weights, and phi for qam.
MeanMethod make_method(const std::string& name, std::optional<std::vector<double>> weights,
                       const std::optional<std::string>& phi);
nlohmann::json dataset_to_json(const CompositionalDataset& ds);
CompositionalDataset dataset_from_json(const nlohmann::json& j);
nlohmann::json grouping_to_json(const Grouping& g);
Grouping grouping_from_json(const nlohmann::json& j);
nlohmann::json sites_to_json(const SiteSet& s);
SiteSet sites_from_json(const nlohmann::json& j);

inline constexpr double kExactTol = 1e-10;
inline constexpr double kSolverTol = 1e-8;

/// C1: M(x, ..., x) = x within 1e-10 in half-taxi distance.
AxiomReport check_reflexivity(const MeanMethod& method, const Composition& x, std::size_t n);

/// C2 through amalgamation: the first-block mean must not depend on how the
/// remaining parts are grouped. Both groupings must share their first block.
AxiomReport check_marginal_stability(const MeanMethod& method, const CompositionalDataset& ds, const Grouping& a,
                                     const Grouping& b);

/// C3 by shrinking finite differences. Each datum is moved toward the
/// barycentre and along +-(e_k - e_l); the ratio |dM|_inf / |dx|_inf is
/// recorded per step size. Fails when some ratio exceeds ten times
/// max(1, ratio at the largest step), i.e. when it grows as the step shrinks.
AxiomReport check_continuity(const MeanMethod& method, const CompositionalDataset& ds,
                             const std::vector<double>& deltas = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7});

/// C4: output invariant (1e-12) under `trials` random row permutations.
AxiomReport check_symmetry(const MeanMethod& method, const CompositionalDataset& ds, std::size_t trials,
                           std::uint64_t seed);
/// Single-permutation form used for replay.
AxiomReport check_permutation(const MeanMethod& method, const CompositionalDataset& ds,
                              const std::vector<std::size_t>& perm);

/// Parts (raw componentwise values for quasi-arithmetic means) sum to one
/// within 1e-10.
AxiomReport check_sum_to_one(const MeanMethod& method, const CompositionalDataset& ds);

/// Re-runs a check from its witness.
AxiomReport replay(const AxiomReport& report);

struct SweepOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t min_rows = 2;
  std::size_t max_rows = 8;
  /// Parts of the amalgamated data in C2 trials; 0 draws 3..5 at random.
  std::size_t output_parts = 0;
  /// Parts of generated data for C1, C3, C4 and sum-to-one trials.
  std::size_t parts = 4;
  double min_part = 0.01;
};

/// Random dataset for trial `t` and, for C2, a random grouping pair.
struct TrialData {
  CompositionalDataset ds;
  std::optional<Grouping> a;
  std::optional<Grouping> b;
};
TrialData c2_trial_data(const SweepOptions& opt, std::size_t t, std::size_t rows);

/// Runs `trials` independent checks of one axiom for one method.
std::vector<AxiomReport> sweep(Axiom axiom, const MeanMethod& method, const SweepOptions& opt);

/// Worst case of a sweep (largest residual); first entry when all tie.
const AxiomReport& worst(const std::vector<AxiomReport>& reports);

/// Best affine fit of each output part to the corresponding input column over
/// random datasets; passes when the fit is exact (1e-8) with one weight
/// vector for every part and weights summing to one. C1 and C2 sweeps run
/// first; if either fails the probe is reported as not applicable.
AxiomReport theorem2_linearity_probe(const MeanMethod& method, std::size_t p, std::size_t trials,
                                     std::uint64_t seed);

struct CovConfig {
  CovModel model;
  SiteSet sites;
};
nlohmann::json config_to_json(const CovConfig& c);
CovConfig config_from_json(const nlohmann::json& j);

/// Proportional model: p in 2..5, n in 2..10, d in 1..3, a random
/// non-cosine family, sites uniform in [0, 10]^d.
CovConfig random_proportional_config(Rng& rng);
/// Two-term exponential LMC whose ranges differ by a factor of 4 to 8.
CovConfig random_lmc_config(Rng& rng);

/// Numbers checked for one cokriging solve.
struct CokrigingCheck {
  WeightEquality equality;
  /// max |lambda - krige_mean_single(R)| for proportional models, else NaN.
  double single_gap = 0.0;
  double stationarity = 0.0;  // |C Lambda - J mu|_max / |C|_max
  double unbiasedness = 0.0;  // |J^T Lambda - I|_max
  double mu_identity = 0.0;   // |mu - (J^T C^-1 J)^-1|_max / |mu|_max, via full-pivot LU
  bool nonnegative = false;
  /// Parts of the estimate from a random dataset lie in [-1e-12, 1 + 1e-12];
  /// only evaluated when the weights are nonnegative.
  bool in_simplex = true;
};
CokrigingCheck check_cokriging(const CovConfig& config, Rng& rng);

struct Theorem3Sweep {
  std::vector<AxiomReport> reports;
  std::vector<CokrigingCheck> checks;
  std::size_t hits = 0;  // forward: passes; converse: deviation > 1e-6
  double fraction = 0.0;
  std::optional<std::size_t> witness_trial;  // converse: largest deviation
  double max_deviation = 0.0;
};

/// Forward sweep (proportional configs, equal weights at 1e-9 and equal to
/// the single-variable weights at 1e-10) or converse sweep (LMC configs,
/// records how often the weights diverge by more than 1e-6).
Theorem3Sweep theorem3_sweep(bool proportional, std::size_t trials, std::uint64_t seed);
/// Sweep with a fixed model at random sites (CLI `--model`).
Theorem3Sweep theorem3_sweep(const CovModel& model, std::size_t trials, std::uint64_t seed);

/// Equal-weight cokriging verdict for one configuration.
AxiomReport theorem3_check(const CovConfig& config, std::uint64_t seed, std::size_t trial);

/// Searches for a dataset pair that differ by `delta` in one datum while
/// their graph medians are more than `jump` apart in half-taxi distance.
struct GraphMedianJump {
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  std::size_t datum = 0;
  std::size_t from = 0;  // the datum moves along e_to - e_from
  std::size_t to = 0;
  CompositionalDataset before;
  CompositionalDataset after;
  double jump = 0.0;
};
std::optional<GraphMedianJump> find_graph_median_jump(std::uint64_t seed, std::size_t max_trials,
                                                      double delta = 1e-6, double jump = 0.1);

/// Searches gaussian-family site triples (one close pair) for a correlation
/// matrix whose unconstrained kriging weights have an entry below -margin.
struct NegativeWeightTriple {
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  SiteSet sites;
  double range = 1.0;
  Eigen::MatrixXd correlation;
};
std::optional<NegativeWeightTriple> find_negative_weight_triple(std::uint64_t seed, std::size_t max_trials,
                                                                double margin = 1e-2);

}  // namespace sgeo
