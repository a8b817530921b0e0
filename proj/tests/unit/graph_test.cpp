#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphs.hpp"
#include "stacklp/error.hpp"
#include "stacklp/graph.hpp"
#include "stacklp/synth.hpp"

namespace stacklp {
namespace {

using testing::complete_graph;
using testing::path_graph;
using Records = std::vector<std::pair<std::string, std::string>>;

TEST(GraphIngest, BuildsPathFromTokens) {
  const Records records{{"a", "b"}, {"b", "c"}};
  const Graph g = Graph::from_edge_list(records);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.label(2), "c");
}

TEST(GraphIngest, DropsDuplicatesAndSelfLoops) {
  const Records records{{"a", "b"}, {"b", "a"}, {"a", "a"}};
  IngestStats stats;
  const Graph g = Graph::from_edge_list(records, &stats);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(stats.duplicates_dropped, 1u);
  EXPECT_EQ(stats.self_loops_dropped, 1u);
}

TEST(GraphIngest, EmptyInputIsAnError) {
  const Records records;
  EXPECT_THROW(Graph::from_edge_list(records), Error);
}

TEST(GraphIngest, ReadsTextFormat) {
  std::istringstream in("# comment\n\nx y\ny z\n  z x \n");
  const Graph g = read_edge_list(in);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  ASSERT_TRUE(g.index_of("z").has_value());
}

TEST(GraphIngest, MalformedLineNamesTheLine) {
  std::istringstream in("a b\nlonely\n");
  try {
    read_edge_list(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kIo);
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
  }
}

TEST(GraphIngest, WriteThenReadRoundTrips) {
  const Records records{{"p", "q"}, {"q", "r"}, {"r", "s"}};
  const Graph g = Graph::from_edge_list(records);
  std::stringstream text;
  write_edge_list(text, g);
  const Graph back = read_edge_list(text);
  EXPECT_EQ(back, g);
}

TEST(NonEdges, CompleteGraphHasNone) { EXPECT_TRUE(complete_graph(3).non_edges().empty()); }

TEST(NonEdges, PathHasItsEndpoints) {
  const auto ne = path_graph(3).non_edges();
  ASSERT_EQ(ne.size(), 1u);
  EXPECT_EQ(ne[0], NodePair(0, 2));
}

TEST(NonEdges, CountMatchesEnumerationOnErGraph) {
  SyntheticSpec spec;
  spec.name = "er";
  spec.n = 505;
  spec.p = 0.008;
  const Graph g = generate(spec, 11).graph;
  std::uint64_t enumerated = 0;
  std::set<NodePair> seen;
  g.for_each_non_edge([&](NodeId i, NodeId j) {
    ++enumerated;
    EXPECT_FALSE(g.has_edge(i, j));
    EXPECT_LT(i, j);
  });
  const std::uint64_t n = g.node_count();
  EXPECT_EQ(enumerated, n * (n - 1) / 2 - g.edge_count());
  EXPECT_EQ(g.non_edge_count(), enumerated);
  EXPECT_EQ(g.non_edges().size(), enumerated);
}

TEST(RemoveEdges, TriangleMinusOneEdgeIsPath) {
  const Graph k3 = complete_graph(3);
  const std::vector<NodePair> subset{{1, 2}};
  const Graph g = k3.remove_edges(subset);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_FALSE(g.has_edge(1, 2));
}

TEST(RemoveEdges, EmptySubsetIsIdentity) {
  const Graph k4 = complete_graph(4);
  EXPECT_EQ(k4.remove_edges({}), k4);
}

TEST(RemoveEdges, AllEdgesLeavesNodes) {
  const Graph k4 = complete_graph(4);
  const std::vector<NodePair> all(k4.edges().begin(), k4.edges().end());
  const Graph g = k4.remove_edges(all);
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(RemoveEdges, RejectsNonEdges) {
  const std::vector<NodePair> subset{{0, 2}};
  EXPECT_THROW(path_graph(3).remove_edges(subset), Error);
}

TEST(GraphInvariants, DegreeSumIsTwiceEdges) {
  const Graph g = testing::two_cliques(5);
  std::size_t sum = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) sum += g.degree(v);
  EXPECT_EQ(sum, 2 * g.edge_count());
}

TEST(GraphInvariants, RelabelPreservesEdges) {
  const Graph g = path_graph(4);
  const std::vector<NodeId> perm{3, 2, 1, 0};
  const Graph r = g.relabel(perm);
  EXPECT_EQ(r.edge_count(), g.edge_count());
  EXPECT_TRUE(r.has_edge(3, 2));
  EXPECT_TRUE(r.has_edge(1, 0));
  EXPECT_FALSE(r.has_edge(3, 0));
}

}  // namespace
}  // namespace stacklp
