#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "graphs.hpp"
#include "stacklp/low_rank.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/synth.hpp"
#include "stacklp/topo_features.hpp"

namespace stacklp {
namespace {

using testing::complete_graph;
using testing::cycle_graph;
using testing::path_graph;
using testing::star_graph;

double value(const PairFeatureTable& t, std::size_t row, const std::string& id) {
  const auto c = t.find(id);
  EXPECT_GE(c, 0) << id;
  return t.at(row, static_cast<std::size_t>(c));
}

Graph random_small_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NodePair> e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) e.emplace_back(i, j);
    }
  }
  return Graph::from_pairs(n, e);
}

/// All-pairs hop distances by Floyd-Warshall; unreachable = n.
std::vector<std::vector<double>> floyd(const Graph& g) {
  const std::size_t n = g.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges()) d[e.first][e.second] = d[e.second][e.first] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  for (auto& row : d) {
    for (double& x : row) {
      if (std::isinf(x)) x = static_cast<double>(n);
    }
  }
  return d;
}

TEST(PairwiseScores, PathEndpoints) {
  const Graph g = path_graph(3);
  const std::vector<NodePair> pairs{{0, 2}};
  const auto t = pairwise_scores(g, pairs);
  EXPECT_DOUBLE_EQ(value(t, 0, "CN"), 1.0);
  EXPECT_DOUBLE_EQ(value(t, 0, "JC"), 1.0);
  EXPECT_NEAR(value(t, 0, "AA"), 1.0 / std::log(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(value(t, 0, "RA"), 0.5);
  EXPECT_DOUBLE_EQ(value(t, 0, "PA"), 1.0);
  EXPECT_DOUBLE_EQ(value(t, 0, "LHN"), 1.0);
  EXPECT_DOUBLE_EQ(value(t, 0, "SP"), -2.0);
}

TEST(PairwiseScores, DisconnectedPairMapsToNodeCount) {
  const Graph g = Graph::from_pairs(4, std::vector<NodePair>{{0, 1}, {2, 3}});
  const std::vector<NodePair> pairs{{0, 2}};
  const auto t = pairwise_scores(g, pairs);
  EXPECT_DOUBLE_EQ(value(t, 0, "CN"), 0.0);
  EXPECT_DOUBLE_EQ(value(t, 0, "JC"), 0.0);
  EXPECT_DOUBLE_EQ(value(t, 0, "SP"), -4.0);
}

TEST(PairwiseScores, MatchBruteForceOnSmallGraphs) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 4 + seed % 4;
    const Graph g = random_small_graph(n, 0.45, seed);
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    for (const auto& e : g.edges()) a[e.first][e.second] = a[e.second][e.first] = 1;
    std::vector<int> deg(n, 0);
    for (std::size_t i = 0; i < n; ++i) deg[i] = std::accumulate(a[i].begin(), a[i].end(), 0);
    const auto dist = floyd(g);
    std::vector<NodePair> pairs;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    const auto t = pairwise_scores(g, pairs);
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const auto [i, j] = std::pair{pairs[r].first, pairs[r].second};
      double cn = 0, aa = 0, ra = 0, uni = 0;
      for (std::size_t z = 0; z < n; ++z) {
        if (a[i][z] && a[j][z]) {
          cn += 1;
          aa += 1.0 / std::log(static_cast<double>(deg[z]));
          ra += 1.0 / deg[z];
        }
        if (a[i][z] || a[j][z]) uni += 1;
      }
      const double pa = static_cast<double>(deg[i]) * deg[j];
      EXPECT_DOUBLE_EQ(value(t, r, "CN"), cn);
      EXPECT_NEAR(value(t, r, "AA"), aa, 1e-12);
      EXPECT_NEAR(value(t, r, "RA"), ra, 1e-12);
      EXPECT_DOUBLE_EQ(value(t, r, "PA"), pa);
      EXPECT_NEAR(value(t, r, "JC"), uni > 0 ? cn / uni : 0.0, 1e-12);
      EXPECT_NEAR(value(t, r, "LHN"), pa > 0 ? cn / pa : 0.0, 1e-12);
      EXPECT_DOUBLE_EQ(value(t, r, "SP"), -dist[i][j]);
    }
  }
}

TEST(PairwiseScores, FullRankLraReproducesAdjacency) {
  const Graph g = random_small_graph(7, 0.5, 99);
  std::vector<NodePair> pairs;
  for (NodeId i = 0; i < 7; ++i) {
    for (NodeId j = i + 1; j < 7; ++j) pairs.emplace_back(i, j);
  }
  TopoOptions opt;
  opt.lra_rank = 7;
  const auto t = pairwise_scores(g, pairs, opt);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const double expected = g.has_edge(pairs[r].first, pairs[r].second) ? 1.0 : 0.0;
    EXPECT_NEAR(value(t, r, "LRA"), expected, 1e-9);
  }
}

TEST(PersonalizedPagerank, RowsAreDistributions) {
  const Graph g = random_small_graph(12, 0.3, 5);
  const auto ppr = personalized_pagerank(g, 0.15);
  for (std::size_t s = 0; s < 12; ++s) {
    double sum = 0;
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_GE(ppr[s * 12 + t], -1e-12);
      sum += ppr[s * 12 + t];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(PersonalizedPagerank, SatisfiesFixedPoint) {
  const Graph g = random_small_graph(10, 0.4, 8);
  const double c = 0.15;
  const auto ppr = personalized_pagerank(g, c);
  const std::size_t n = 10;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      double inflow = 0;
      for (NodeId u : g.neighbors(static_cast<NodeId>(t))) inflow += ppr[s * n + u] / g.degree(u);
      double expected = (1 - c) * inflow + (s == t ? c : 0.0);
      bool dangling_source = g.degree(static_cast<NodeId>(s)) == 0;
      if (!dangling_source) EXPECT_NEAR(ppr[s * n + t], expected, 1e-8);
    }
  }
}

TEST(GlobalFeatures, Triangle) {
  const auto g = global_features(complete_graph(3));
  EXPECT_DOUBLE_EQ(g.nodes, 3);
  EXPECT_DOUBLE_EQ(g.observed_edges, 3);
  EXPECT_DOUBLE_EQ(g.average_degree, 2);
  EXPECT_DOUBLE_EQ(g.degree_variance, 0);
  EXPECT_DOUBLE_EQ(g.diameter, 1);
  EXPECT_DOUBLE_EQ(g.transitivity, 1);
  EXPECT_DOUBLE_EQ(g.average_clustering, 1);
}

TEST(GlobalFeatures, Path) {
  const auto g = global_features(path_graph(3));
  EXPECT_NEAR(g.average_degree, 4.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.diameter, 2);
  EXPECT_DOUBLE_EQ(g.transitivity, 0);
  EXPECT_DOUBLE_EQ(g.average_clustering, 0);
}

TEST(GlobalFeatures, RegularGraphHasZeroAssortativity) {
  EXPECT_DOUBLE_EQ(global_features(cycle_graph(6)).degree_assortativity, 0.0);
}

TEST(GlobalFeatures, StarIsDisassortative) {
  EXPECT_NEAR(global_features(star_graph(5)).degree_assortativity, -1.0, 1e-12);
}

TEST(NodeMeasures, CycleEigenvectorIsUniform) {
  const auto m = node_measures(cycle_graph(4));
  for (double x : m.eigenvector) EXPECT_NEAR(x, 0.5, 1e-6);
}

TEST(NodeMeasures, PathBetweenness) {
  const auto m = node_measures(path_graph(3));
  EXPECT_NEAR(m.betweenness[1], 1.0, 1e-12);
  EXPECT_NEAR(m.betweenness[0], 0.0, 1e-12);
  EXPECT_NEAR(m.betweenness[2], 0.0, 1e-12);
}

TEST(NodeMeasures, StarHubDegreeCentrality) {
  const auto m = node_measures(star_graph(4));
  EXPECT_DOUBLE_EQ(m.degree_centrality[0], 1.0);
  EXPECT_DOUBLE_EQ(m.degree_centrality[1], 0.25);
}

TEST(NodeMeasures, BetweennessMatchesPathCounting) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 7;
    const Graph g = random_small_graph(n, 0.4, seed * 7);
    const auto d = floyd(g);
    // sigma[s][t]: number of shortest paths, by dynamic programming over distance layers.
    std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
      sigma[s][s] = 1;
      for (double layer = 1; layer < static_cast<double>(n); ++layer) {
        for (std::size_t t = 0; t < n; ++t) {
          if (d[s][t] != layer || !g.degree(static_cast<NodeId>(t))) continue;
          for (NodeId u : g.neighbors(static_cast<NodeId>(t))) {
            if (d[s][u] == layer - 1) sigma[s][t] += sigma[s][u];
          }
        }
      }
    }
    const auto m = node_measures(g);
    const double norm = (n - 1.0) * (n - 2.0) / 2.0;
    for (std::size_t v = 0; v < n; ++v) {
      double bc = 0;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
          if (s == v || t == v || sigma[s][t] == 0) continue;
          if (d[s][v] + d[v][t] == d[s][t]) bc += sigma[s][v] * sigma[v][t] / sigma[s][t];
        }
      }
      EXPECT_NEAR(m.betweenness[v], bc / norm, 1e-9) << "seed " << seed << " node " << v;
    }
  }
}

TEST(NodeMeasures, TriangleCounts) {
  const auto t = triangle_counts(complete_graph(4));
  for (double x : t) EXPECT_DOUBLE_EQ(x, 3.0);
}

TEST(NodeFeatures, EndpointOrderFollowsIndex) {
  const Graph g = star_graph(3);
  const std::vector<NodePair> pairs{{1, 0}};
  const auto t = node_features(g, pairs);
  EXPECT_DOUBLE_EQ(value(t, 0, "DC_i"), 1.0);
  EXPECT_NEAR(value(t, 0, "DC_j"), 1.0 / 3.0, 1e-12);
}

TEST(TopologicalFeatures, ShapeAndFiniteness) {
  SyntheticSpec spec;
  spec.name = "er";
  spec.n = 120;
  spec.p = 0.05;
  const Graph g = generate(spec, 3).graph;
  const auto pairs = g.non_edges();
  const auto t = topological_features(g, pairs);
  EXPECT_EQ(t.cols(), 42u);
  EXPECT_EQ(t.rows(), pairs.size());
  EXPECT_NO_THROW(t.check_finite());
  EXPECT_EQ(topological_column_ids().size(), 42u);
}

TEST(TopologicalFeatures, WorkerCountDoesNotChangeValues) {
  SyntheticSpec spec;
  spec.name = "er";
  spec.n = 80;
  spec.p = 0.08;
  const Graph g = generate(spec, 4).graph;
  const auto pairs = g.non_edges();
  TopoOptions one, four;
  four.workers = 4;
  EXPECT_EQ(topological_features(g, pairs, one), topological_features(g, pairs, four));
}

TEST(LowRank, FullRankOnTriangle) {
  const Graph g = complete_graph(3);
  const auto lra = LowRankApprox::exact(g, 3);
  for (NodeId i = 0; i < 3; ++i) {
    for (NodeId j = 0; j < 3; ++j) EXPECT_NEAR(lra.entry(i, j), i == j ? 0.0 : 1.0, 1e-9);
  }
}

TEST(LowRank, RankOneStarIsSymmetric) {
  const auto lra = LowRankApprox::exact(star_graph(5), 1);
  for (NodeId leaf = 2; leaf <= 5; ++leaf) EXPECT_NEAR(lra.entry(0, leaf), lra.entry(0, 1), 1e-9);
}

TEST(LowRank, ErrorShrinksWithRank) {
  SyntheticSpec spec;
  spec.name = "sbm";
  spec.k = 2;
  spec.n = 100;
  spec.p_in = 0.2;
  spec.p_out = 0.02;
  const Graph g = generate(spec, 5).graph;
  const double e2 = LowRankApprox::exact(g, 2).reconstruction_error(g);
  const double e8 = LowRankApprox::exact(g, 8).reconstruction_error(g);
  EXPECT_LE(e8, e2);
  const double r8 = LowRankApprox::randomized(g, 8, 4, 8, 1).reconstruction_error(g);
  EXPECT_LE(r8, e2);
  EXPECT_GE(r8, e8 - 1e-9);
}

}  // namespace
}  // namespace stacklp
