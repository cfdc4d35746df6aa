#pragma once

// Regression fixtures. Each randomized one records the seed and trial of the
// search that produced it; tests re-run the search and compare.

#include <cstdint>
#include <vector>

#include "sgeo/axiom_lab.hpp"
#include "sgeo/covariance.hpp"
#include "sgeo/simplex.hpp"

namespace fixture {

// Worked example: two compositions and their ilr coordinates.
inline const std::vector<double> kX{0.6, 0.3, 0.1};
inline const std::vector<double> kXPrime{0.3, 0.3, 0.4};

// Two-variable LMC with diagonal sill matrices and ranges 1 and 5.
inline sgeo::CovModel lmc_witness() {
  using sgeo::CorrelationFamily;
  using sgeo::CorrelationFunction;
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 1.0, 0.0, 0.0, 0.1;
  s2 << 0.1, 0.0, 0.0, 1.0;
  return sgeo::CovModel::lmc({{s1, CorrelationFunction(CorrelationFamily::exponential, 1.0)},
                              {s2, CorrelationFunction(CorrelationFamily::exponential, 5.0)}});
}
inline sgeo::SiteSet lmc_witness_sites() { return sgeo::SiteSet{{0.0}, {1.0}, {3.0}}; }

// Gaussian-family triple with a clustered pair whose unconstrained weights
// include an entry below -1e-2. From find_negative_weight_triple(seed 1).
inline constexpr std::uint64_t kNegativeTripleSeed = 1;
inline constexpr std::size_t kNegativeTripleTrial = 1;
inline constexpr double kNegativeTripleRange = 1.550276000349752;
inline sgeo::SiteSet negative_triple_sites() {
  return sgeo::SiteSet{{0.0}, {0.073431572104630582}, {2.3067543002123747}};
}
inline const std::vector<double> kNegativeTripleLambda{2.116613799152109, -1.6335765944345342,
                                                       0.51696279528242517};

// Graph median discontinuity: moving datum 4 by 1e-6 along e_0 - e_1 makes
// the median jump. From find_graph_median_jump(seed 1).
inline constexpr std::uint64_t kGraphJumpSeed = 1;
inline constexpr std::size_t kGraphJumpTrial = 2;
inline constexpr std::size_t kGraphJumpDatum = 4;
inline sgeo::CompositionalDataset graph_jump_before() {
  return sgeo::CompositionalDataset::from_rows({
      sgeo::Composition({0.4839344786094767, 0.38140500343385836, 0.13466051795666492}),
      sgeo::Composition({0.2574126574706357, 0.42337847814029544, 0.319208864389069}),
      sgeo::Composition({0.08901698255876817, 0.6660516804146409, 0.24493133702659098}),
      sgeo::Composition({0.3942427082812603, 0.20015908135227353, 0.40559821036646626}),
      sgeo::Composition({0.3315619500655163, 0.6240783539567478, 0.04435969597773602}),
  });
}
inline sgeo::CompositionalDataset graph_jump_after() {
  return graph_jump_before().with_row(
      kGraphJumpDatum, sgeo::Composition({0.3315629500655163, 0.6240773539567478, 0.04435969597773602}));
}
inline const std::vector<double> kGraphJumpMedianBefore{0.17321482001470193, 0.54471507927746821,
                                                        0.28207010070783001};
inline const std::vector<double> kGraphJumpMedianAfter{0.48393447860947669, 0.38140500343385836,
                                                       0.13466051795666492};

// Largest C2 discrepancy of the geometric mean over 1000 sweep trials
// (seed 1, trial 11). The ilr mean and the log quasi-arithmetic mean give the
// same closed point, so the witness serves all three.
inline constexpr std::uint64_t kC2WitnessSeed = 1;
inline constexpr std::size_t kC2WitnessTrial = 11;
inline sgeo::CompositionalDataset c2_witness_dataset() {
  return sgeo::CompositionalDataset::from_rows({
      sgeo::Composition({0.13560648332892158, 0.05893283200559431, 0.025909219915111702, 0.7795514647503725}),
      sgeo::Composition({0.15705573827575442, 0.38272633887012314, 0.43886116316048956, 0.021356759693632855}),
  });
}
inline sgeo::Grouping c2_witness_a() { return sgeo::Grouping({{0}, {1, 2}, {3}}, 4); }
inline sgeo::Grouping c2_witness_b() { return sgeo::Grouping({{0}, {2, 3}, {1}}, 4); }
inline constexpr double kC2WitnessValueA = 0.2707638289233649;
inline constexpr double kC2WitnessValueB = 0.16126369935997537;

}  // namespace fixture
