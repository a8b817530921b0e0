#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "graphs.hpp"
#include "stacklp/model_features.hpp"
#include "stacklp/modularity.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/sbm_mdl.hpp"
#include "stacklp/spectral_nb.hpp"
#include "stacklp/synth.hpp"

namespace stacklp {
namespace {

using testing::complete_graph;
using testing::two_cliques;

/// Modularity straight from the definition over node pairs.
double brute_modularity(const Graph& g, const std::vector<BlockId>& labels) {
  const double m = static_cast<double>(g.edge_count());
  double q = 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (NodeId j = 0; j < g.node_count(); ++j) {
      if (labels[i] != labels[j]) continue;
      const double a = g.has_edge(i, j) ? 1.0 : 0.0;
      q += a - static_cast<double>(g.degree(i)) * g.degree(j) / (2.0 * m);
    }
  }
  return q / (2.0 * m);
}

/// Calls fn on every set partition of n nodes (restricted growth strings).
void for_each_partition(std::size_t n, const std::function<void(const std::vector<BlockId>&)>& fn) {
  std::vector<BlockId> a(n, 0);
  std::function<void(std::size_t, BlockId)> rec = [&](std::size_t i, BlockId used) {
    if (i == n) {
      fn(a);
      return;
    }
    for (BlockId b = 0; b <= used; ++b) {
      a[i] = b;
      rec(i + 1, std::max<BlockId>(used, b + 1));
    }
  };
  a[0] = 0;
  rec(1, 1);
}

const SyntheticSpec& suite_row(const std::string& name) {
  static const auto suite = builtin_suite();
  for (const auto& s : suite) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("missing suite row " + name);
}

double two_block_agreement(const Partition& fit, const std::vector<BlockId>& planted) {
  std::size_t same = 0;
  for (std::size_t v = 0; v < planted.size(); ++v) same += fit.block_of(static_cast<NodeId>(v)) == planted[v];
  const double a = static_cast<double>(same) / static_cast<double>(planted.size());
  return std::max(a, 1.0 - a);
}

TEST(Modularity, MatchesDefinition) {
  const Graph g = two_cliques(4);
  const std::vector<BlockId> labels{0, 0, 1, 1, 0, 1, 0, 1};
  EXPECT_NEAR(modularity(g, Partition(g, labels)), brute_modularity(g, labels), 1e-12);
}

TEST(Modularity, TwoCliquesIsExhaustiveOptimum) {
  const Graph g = two_cliques(4);
  double best = -1.0;
  std::vector<BlockId> best_labels;
  for_each_partition(8, [&](const std::vector<BlockId>& labels) {
    const double q = brute_modularity(g, labels);
    if (q > best + 1e-12) {
      best = q;
      best_labels = labels;
    }
  });
  const std::vector<BlockId> cliques{0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_EQ(best_labels, cliques);
  const Partition fit = fit_modularity(g, 3);
  EXPECT_EQ(fit.k(), 2u);
  EXPECT_EQ(fit, Partition(g, cliques));
  EXPECT_NEAR(modularity(g, fit), best, 1e-12);
}

TEST(Modularity, CompleteGraphStaysWhole) {
  const Graph g = complete_graph(5);
  const Partition fit = fit_modularity(g, 1);
  EXPECT_EQ(fit.k(), 1u);
  EXPECT_GE(modularity(g, fit), -1e-12);
}

TEST(Modularity, FitNeverBelowSingleBlock) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = generate(suite_row("moderate-weibull-k4"), seed).graph;
    EXPECT_GE(modularity(g, fit_modularity(g, seed)), -1e-12);
  }
}

TEST(ModularityScore, EqualsRecomputedGain) {
  const Graph g = two_cliques(4);
  const std::vector<BlockId> labels{0, 0, 0, 0, 1, 1, 1, 1};
  const Partition part(g, labels);
  const double before = brute_modularity(g, labels);
  const std::vector<NodePair> pairs = g.non_edges();
  const auto scores = score_modularity(g, part, pairs);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    std::vector<NodePair> edges(g.edges().begin(), g.edges().end());
    edges.push_back(pairs[r]);
    const Graph plus = Graph::from_pairs(g.node_count(), edges);
    EXPECT_NEAR(scores[r], brute_modularity(plus, labels) - before, 1e-12);
  }
}

TEST(ModularityScore, WithinBlockBeatsCrossBlock) {
  // Two triangles with a bridge plus two pendant nodes, one per side.
  const Graph g = Graph::from_pairs(
      8, std::vector<NodePair>{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}, {0, 6}, {5, 7}});
  const std::vector<BlockId> labels{0, 0, 0, 1, 1, 1, 0, 1};
  const Partition part(g, labels);
  const std::vector<NodePair> pairs{{1, 6}, {1, 7}};  // equal endpoint degrees
  const auto s = score_modularity(g, part, pairs);
  EXPECT_GT(s[0], 0.0);
  EXPECT_LT(s[1], s[0]);
}

TEST(ModularityScore, RelabelingEquivariant) {
  const Graph g = two_cliques(4);
  const std::vector<NodeId> perm{7, 6, 5, 4, 3, 2, 1, 0};
  const Graph h = g.relabel(perm);
  const Partition pg = fit_modularity(g, 1);
  std::vector<BlockId> moved(8);
  for (NodeId v = 0; v < 8; ++v) moved[perm[v]] = pg.block_of(v);
  const Partition ph(h, moved);
  const std::vector<NodePair> pairs{{0, 5}, {1, 2}};
  const std::vector<NodePair> mapped{{perm[0], perm[5]}, {perm[1], perm[2]}};
  const auto a = score_modularity(g, pg, pairs);
  const auto b = score_modularity(h, ph, mapped);
  EXPECT_NEAR(a[0], b[0], 1e-12);
  EXPECT_NEAR(a[1], b[1], 1e-12);
}

TEST(SbmScore, ClosedFormulas) {
  const Graph g = two_cliques(3);  // blocks {0,1,2}, {3,4,5}; m_00 = m_11 = 3, m_01 = 1
  const Partition part(g, std::vector<BlockId>{0, 0, 0, 1, 1, 1});
  const std::vector<NodePair> pairs{{0, 1}, {0, 4}};
  const auto standard = score_sbm(g, part, SbmVariant::kStandard, pairs);
  EXPECT_DOUBLE_EQ(standard[0], 3.0 / 3.0);
  EXPECT_DOUBLE_EQ(standard[1], 1.0 / 9.0);
  const auto dc = score_sbm(g, part, SbmVariant::kDegreeCorrected, pairs);
  // d_0 = 2, d_1 = 2, d_4 = 2, block degrees 7 and 7.
  EXPECT_NEAR(dc[0], (2.0 / 7) * (2.0 / 7) * 6.0, 1e-12);
  EXPECT_NEAR(dc[1], (2.0 / 7) * (2.0 / 7) * 1.0, 1e-12);
}

TEST(SbmScore, DegreeCorrectedIsLinearInDegree) {
  const Graph g = generate(suite_row("low-weibull-k2"), 3).graph;
  const Partition part = fit_sbm_mdl(g, SbmVariant::kDegreeCorrected, 1).partition;
  NodeId a = 0, b = 0, c = 0;
  bool found = false;
  for (NodeId i = 0; i < g.node_count() && !found; ++i) {
    for (NodeId j = i + 1; j < g.node_count() && !found; ++j) {
      if (part.block_of(i) == part.block_of(j) && g.degree(i) != g.degree(j) && g.degree(i) > 0 && g.degree(j) > 0) {
        a = i;
        b = j;
        c = j + 1 < g.node_count() ? j + 1 : 0;
        found = c != a && c != b;
      }
    }
  }
  ASSERT_TRUE(found);
  const std::vector<NodePair> pairs{{a, c}, {b, c}};
  const auto s = score_sbm(g, part, SbmVariant::kDegreeCorrected, pairs);
  EXPECT_NEAR(s[0] / g.degree(a), s[1] / g.degree(b), 1e-12);
}

TEST(SbmScore, WithinBlockRatesSumToTwiceEdges) {
  const auto planted = generate(suite_row("low-weibull-k4"), 8);
  const Graph& g = planted.graph;
  const Partition& part = planted.partition;
  for (BlockId r = 0; r < part.k(); ++r) {
    std::vector<NodeId> members;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (part.block_of(v) == r) members.push_back(v);
    }
    std::vector<NodePair> pairs;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) pairs.emplace_back(members[a], members[b]);
    }
    const auto s = score_sbm(g, part, SbmVariant::kDegreeCorrected, pairs);
    // Ordered pairs i != j, plus the i == j terms (d_i / d_r)^2 * 2 m_rr.
    double total = 2.0 * std::accumulate(s.begin(), s.end(), 0.0);
    const double dr = static_cast<double>(part.block_degree(r));
    const double mrr = static_cast<double>(part.block_edges(r, r));
    for (NodeId v : members) total += std::pow(g.degree(v) / dr, 2) * 2.0 * mrr;
    EXPECT_NEAR(total, 2.0 * mrr, 1e-6 * std::max(1.0, mrr));
  }
}

TEST(DescriptionLength, SingleBlockIsErEncoding) {
  const Graph g = generate(suite_row("low-poisson-k1"), 2).graph;
  const double n = static_cast<double>(g.node_count());
  const double pairs = n * (n - 1) / 2;
  const double m = static_cast<double>(g.edge_count());
  const double nats = std::lgamma(pairs + 1) - std::lgamma(m + 1) - std::lgamma(pairs - m + 1) + std::log(n);
  EXPECT_NEAR(description_length(g, Partition::single_block(g), SbmVariant::kStandard), nats / std::log(2.0), 1e-6);
}

TEST(DescriptionLength, FitBeatsRandomPartitions) {
  for (const char* row : {"low-poisson-k4", "moderate-weibull-k2", "low-powerlaw-k4"}) {
    const Graph g = generate(suite_row(row), 1).graph;
    for (SbmVariant variant : {SbmVariant::kStandard, SbmVariant::kDegreeCorrected}) {
      const MdlFit fit = fit_sbm_mdl(g, variant, 4);
      EXPECT_NEAR(fit.bits, description_length(g, fit.partition, variant), 1e-6);
      Rng rng(17);
      for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        std::vector<BlockId> labels(g.node_count());
        for (auto& b : labels) b = static_cast<BlockId>(rng.below(k));
        EXPECT_LE(fit.bits, description_length(g, Partition(g, labels), variant) + 1e-6) << row;
      }
    }
  }
}

TEST(DescriptionLength, TraceDecreasesWithinEachPhase) {
  const Graph g = generate(suite_row("moderate-poisson-k4"), 5).graph;
  const MdlFit fit = fit_sbm_mdl(g, SbmVariant::kDegreeCorrected, 2);
  ASSERT_FALSE(fit.trace.empty());
  for (std::size_t i = 1; i < fit.trace.size(); ++i) {
    if (fit.trace[i].phase == fit.trace[i - 1].phase) EXPECT_LT(fit.trace[i].bits, fit.trace[i - 1].bits);
  }
}

TEST(DescriptionLength, MergingTwinBlocksCostsAtMostPartitionCode) {
  const Graph g = complete_graph(8);
  const Partition one = Partition::single_block(g);
  const Partition two(g, std::vector<BlockId>{0, 0, 0, 0, 1, 1, 1, 1});
  const double merged = description_length(g, one, SbmVariant::kStandard);
  const double split = description_length(g, two, SbmVariant::kStandard);
  // Partition code difference: log2 C(7, 1) + log2 8! - 2 log2 4! + edge-count multiset growth.
  const double code = std::log2(7.0) + (std::lgamma(9) - 2 * std::lgamma(5)) / std::log(2.0) +
                      (std::lgamma(3 + 28) - std::lgamma(29) - std::lgamma(3)) / std::log(2.0);
  EXPECT_LE(merged - split, code + 1e-9);
}

TEST(SbmFit, RecoversTwoPlantedBlocks) {
  const auto& spec = suite_row("low-poisson-k2");
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto planted = generate(spec, seed);
    const auto fit = fit_sbm_mdl(planted.graph, SbmVariant::kStandard, seed);
    if (fit.partition.k() == 2 && two_block_agreement(fit.partition, planted.types) >= 0.95) ++good;
  }
  EXPECT_GE(good, 9);
}

TEST(SbmFit, ErPrefersOneBlock) {
  const Graph g = generate(suite_row("low-poisson-k1"), 3).graph;
  for (SbmVariant variant : {SbmVariant::kStandard, SbmVariant::kDegreeCorrected}) {
    const MdlFit fit = fit_sbm_mdl(g, variant, 1);
    EXPECT_EQ(fit.partition.k(), 1u);
    const double one = description_length(g, Partition::single_block(g), variant);
    MdlOptions two_opt;
    two_opt.max_blocks = 2;
    const auto two_fit = fit_sbm_mdl(g, variant, 1, two_opt);
    for (const auto& [blocks, bits] : two_fit.by_blocks) {
      if (blocks == 2) EXPECT_LE(one, bits);
    }
  }
}

TEST(SbmFit, DeterministicGivenSeed) {
  const Graph g = generate(suite_row("moderate-weibull-k4"), 2).graph;
  EXPECT_EQ(fit_sbm_mdl(g, SbmVariant::kDegreeCorrected, 9).partition,
            fit_sbm_mdl(g, SbmVariant::kDegreeCorrected, 9).partition);
}

TEST(Spectral, FindsTwoPlantedBlocks) {
  const auto& spec = suite_row("low-poisson-k2");
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto fit = fit_spectral_nb(generate(spec, seed).graph, seed);
    if (fit.estimated_k == 2) ++good;
  }
  EXPECT_GE(good, 9);
}

TEST(Spectral, ErHasOneGroup) {
  const Graph g = generate(suite_row("low-poisson-k1"), 6).graph;
  EXPECT_EQ(fit_spectral_nb(g, 1).estimated_k, 1u);
}

TEST(Spectral, CountInvariantUnderRelabeling) {
  const Graph g = generate(suite_row("low-poisson-k4"), 2).graph;
  std::vector<NodeId> perm(g.node_count());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(3);
  rng.shuffle(perm);
  EXPECT_EQ(fit_spectral_nb(g, 1).estimated_k, fit_spectral_nb(g.relabel(perm), 1).estimated_k);
}

TEST(ModelFeatures, FourColumnsWorkerIndependent) {
  const Graph g = generate(suite_row("low-weibull-k4"), 1).graph;
  std::vector<NodePair> pairs;
  g.for_each_non_edge([&](NodeId i, NodeId j) {
    if (pairs.size() < 500) pairs.emplace_back(i, j);
  });
  ModelOptions one, four;
  one.seed = four.seed = 12;
  four.workers = 4;
  const auto a = model_features(g, pairs, one);
  EXPECT_EQ(a.cols(), 4u);
  EXPECT_EQ(a, model_features(g, pairs, four));
  EXPECT_NO_THROW(a.check_finite());
}

}  // namespace
}  // namespace stacklp
