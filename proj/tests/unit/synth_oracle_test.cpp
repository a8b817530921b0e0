#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "stacklp/error.hpp"
#include "stacklp/oracle.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/synth.hpp"

namespace stacklp {
namespace {

const SyntheticSpec& row(const std::string& name) {
  static const auto suite = builtin_suite();
  for (const auto& s : suite) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("missing suite row " + name);
}

TEST(Suite, HasFortyFiveRows) {
  const auto suite = builtin_suite();
  EXPECT_EQ(suite.size(), 45u);
  std::unordered_set<std::string> names;
  for (const auto& s : suite) {
    EXPECT_TRUE(names.insert(s.name).second);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Suite, PublishedRows) {
  const auto& k32 = row("low-poisson-k32");
  EXPECT_DOUBLE_EQ(k32.p_in, 0.49);
  EXPECT_DOUBLE_EQ(k32.p_out, 0.0003);
  const auto& pl = row("high-powerlaw-k16");
  EXPECT_EQ(pl.n, 626u);
  EXPECT_DOUBLE_EQ(pl.exponent, 1.7);
  EXPECT_DOUBLE_EQ(pl.epsilon, 0.1);
  const auto& er = row("low-poisson-k1");
  EXPECT_EQ(er.n, 505u);
  EXPECT_DOUBLE_EQ(er.p, 0.008);
}

TEST(DegreeDistribution, PoissonSampleMean) {
  const auto dist = DegreeDistribution::poisson(4.0, 100);
  const auto seq = sample_degree_sequence(dist, 10000, 3);
  const double mean = std::accumulate(seq.begin(), seq.end(), 0.0) / 10000.0;
  EXPECT_GE(mean, 3.8);
  EXPECT_LE(mean, 4.2);
}

TEST(DegreeDistribution, WeibullKolmogorovDistance) {
  const std::size_t cap = 2000;
  const auto dist = DegreeDistribution::weibull(1.0, 0.5, cap);
  std::vector<double> target(cap + 1, 0.0);
  double z = 0;
  for (std::size_t r = 1; r <= cap; ++r) {
    target[r] = std::pow(r, -0.5) * std::exp(-std::sqrt(static_cast<double>(r)));
    z += target[r];
  }
  const auto seq = sample_degree_sequence(dist, 10000, 5);
  std::vector<double> counts(cap + 1, 0.0);
  for (auto d : seq) counts[d] += 1;
  double cdf_target = 0, cdf_sample = 0, ks = 0;
  for (std::size_t r = 1; r <= cap; ++r) {
    cdf_target += target[r] / z;
    cdf_sample += counts[r] / 10000.0;
    ks = std::max(ks, std::abs(cdf_target - cdf_sample));
    EXPECT_NEAR(dist.cdf(r), cdf_target, 1e-9);
  }
  EXPECT_LE(ks, 0.02);
}

TEST(DegreeDistribution, PowerLawTruncatedMean) {
  const std::size_t cap = 200;
  const auto dist = DegreeDistribution::power_law(2.5, cap);
  double num = 0, den = 0;
  for (std::size_t r = 1; r <= cap; ++r) {
    num += std::pow(r, -1.5);
    den += std::pow(r, -2.5);
  }
  const double analytic = num / den;
  EXPECT_NEAR(dist.mean(), analytic, 1e-9);
  const auto seq = sample_degree_sequence(dist, 10000, 7);
  const double mean = std::accumulate(seq.begin(), seq.end(), 0.0) / 10000.0;
  EXPECT_NEAR(mean, analytic, 0.05 * analytic);
}

TEST(DegreeDistribution, StructuralCapIsFixedPoint) {
  for (const auto& s : builtin_suite()) {
    if (!s.degree_corrected()) continue;
    const std::size_t cap = structural_degree_cap(s);
    EXPECT_GE(cap, 1u);
    EXPECT_LE(cap, s.n - 1);
    SyntheticSpec explicit_cap = s;
    explicit_cap.degree_cap = cap;
    const double mean = DegreeDistribution::for_spec(explicit_cap).mean();
    EXPECT_LE(std::abs(static_cast<double>(cap) - std::ceil(std::sqrt(s.n * mean))), 1.0) << s.name;
  }
}

TEST(Generate, ErEdgeCountMatchesBinomialMean) {
  const auto& spec = row("low-poisson-k1");
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) total += static_cast<double>(generate(spec, seed).graph.edge_count());
  const double expected = 505.0 * 504.0 / 2.0 * 0.008;
  EXPECT_NEAR(total / 20.0, expected, 0.05 * expected);
}

TEST(Generate, NoCrossEdgesWhenPOutIsZero) {
  SyntheticSpec spec;
  spec.name = "split";
  spec.k = 2;
  spec.n = 200;
  spec.p_in = 0.1;
  spec.p_out = 0.0;
  const auto planted = generate(spec, 1);
  for (const auto& e : planted.graph.edges()) EXPECT_EQ(planted.types[e.first], planted.types[e.second]);
  EXPECT_GT(planted.graph.edge_count(), 0u);
}

TEST(Generate, DegreeCorrectedFuzzinessNearSpec) {
  const auto& spec = row("moderate-weibull-k4");
  double ratio = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto planted = generate(spec, seed);
    double in = 0, out = 0;
    for (const auto& e : planted.graph.edges()) {
      (planted.types[e.first] == planted.types[e.second] ? in : out) += 1;
    }
    ratio += out / in;
  }
  EXPECT_NEAR(ratio / 20.0, spec.epsilon, 0.25 * spec.epsilon);
}

TEST(Generate, DeterministicAndPlantedPartitionConsistent) {
  const auto& spec = row("low-powerlaw-k4");
  const auto a = generate(spec, 9);
  const auto b = generate(spec, 9);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.types, b.types);
  EXPECT_TRUE(a.partition.consistent_with(a.graph));
  EXPECT_EQ(a.partition.k(), 4u);
}

TEST(OracleExact, ClosedForms) {
  EXPECT_DOUBLE_EQ(optimal_auc_exact(row("low-poisson-k1")), 0.5);
  EXPECT_DOUBLE_EQ(optimal_auc_exact(row("low-poisson-k2")), 0.75);
  EXPECT_DOUBLE_EQ(optimal_auc_exact(row("low-poisson-k4")), 0.875);
  EXPECT_DOUBLE_EQ(optimal_auc_exact(row("low-poisson-k16")), 0.96875);
  EXPECT_DOUBLE_EQ(optimal_auc_exact(row("low-poisson-k32")), 0.984375);
}

TEST(OracleExact, OutsideClosedFormThrows) {
  EXPECT_THROW(optimal_auc_exact(row("high-poisson-k4")), Error);
  EXPECT_THROW(optimal_auc_exact(row("low-weibull-k4")), Error);
}

TEST(OracleMonteCarlo, ErIsExactlyHalf) {
  const auto planted = generate(row("low-poisson-k1"), 1);
  const auto est = optimal_auc_mc(planted, 20000, 3);
  EXPECT_EQ(est.auc, 0.5);
  EXPECT_EQ(est.samples, 20000u);
}

TEST(OracleMonteCarlo, FourBlockSbm) {
  const auto planted = generate(row("low-poisson-k4"), 2);
  EXPECT_NEAR(optimal_auc_mc(planted, 100000, 5).auc, 0.875, 0.02);
}

TEST(OracleMonteCarlo, MatchesExhaustiveComparisonOnSmallDcEr) {
  SyntheticSpec spec = row("low-powerlaw-k1");
  spec.n = 50;
  spec.degree_cap = 0;
  const auto planted = generate(spec, 4);
  const auto split = sample_holdout(planted.graph, 0.8, 6);
  ASSERT_FALSE(split.holdout_edges.empty());
  std::vector<double> neg;
  planted.graph.for_each_non_edge([&](NodeId i, NodeId j) { neg.push_back(planted.planted_rate(i, j)); });
  double wins = 0;
  for (const auto& e : split.holdout_edges) {
    const double p = planted.planted_rate(e.first, e.second);
    for (double q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  }
  const double exact = wins / (static_cast<double>(split.holdout_edges.size()) * static_cast<double>(neg.size()));
  const auto est = optimal_auc_mc(planted, split, 200000, 8);
  EXPECT_GT(exact, 0.5);
  EXPECT_NEAR(est.auc, exact, 4 * est.standard_error + 1e-3);
}

TEST(OracleMonteCarlo, StandardErrorScalesWithSamples) {
  const auto planted = generate(row("moderate-weibull-k2"), 3);
  const auto split = sample_holdout(planted.graph, 0.8, 1);
  const auto small = optimal_auc_mc(planted, split, 20000, 2);
  const auto large = optimal_auc_mc(planted, split, 40000, 2);
  EXPECT_NEAR(small.standard_error / large.standard_error, std::sqrt(2.0), 0.1);
}

TEST(OracleMonteCarlo, IndependentOfWorkers) {
  const auto planted = generate(row("low-weibull-k4"), 3);
  const auto split = sample_holdout(planted.graph, 0.8, 1);
  const auto a = optimal_auc_mc(planted, split, 30000, 4, 1);
  const auto b = optimal_auc_mc(planted, split, 30000, 4, 4);
  EXPECT_EQ(a.auc, b.auc);
}

}  // namespace
}  // namespace stacklp
