#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stacklp/feature_table.hpp"
#include "stacklp/graph.hpp"

namespace stacklp {

struct TopoOptions {
  double ppr_restart = 0.15;
  double pagerank_damping = 0.85;
  double katz_fraction = 0.9;  // attenuation = katz_fraction / lambda_max
  double tolerance = 1e-8;
  int pagerank_max_iterations = 200;
  int eigen_max_iterations = 1000;
  std::size_t lra_rank = 0;  // 0 = LowRankApprox::default_rank(n)
  int approx_power_steps = 2;
  int approx_oversampling = 8;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Whole-graph statistics, broadcast to every row.
struct GlobalFeatures {
  double nodes = 0;                 // N
  double observed_edges = 0;        // OE
  double average_degree = 0;        // AD
  double degree_variance = 0;       // VD (population variance)
  double diameter = 0;              // ND, largest connected component
  double degree_assortativity = 0;  // DA, 0 when degrees do not vary over edges
  double transitivity = 0;          // NT
  double average_clustering = 0;    // ACC

  std::array<double, 8> as_array() const {
    return {nodes, observed_edges, average_degree, degree_variance,
            diameter, degree_assortativity, transitivity, average_clustering};
  }
};

GlobalFeatures global_features(const Graph& graph);

/// Per-node measures used for the node-based columns.
struct NodeMeasures {
  std::vector<double> clustering;            // LCC
  std::vector<double> avg_neighbor_degree;   // AND
  std::vector<double> betweenness;           // SPBC, normalized by (n-1)(n-2)/2
  std::vector<double> closeness;             // CC (Wasserman-Faust for disconnected graphs)
  std::vector<double> degree_centrality;     // DC = d / (n-1)
  std::vector<double> eigenvector;           // EC, unit L2 norm
  std::vector<double> katz;                  // KC, unit L2 norm
  std::vector<double> triangles;             // LNT
  std::vector<double> pagerank;              // PR
  std::vector<double> load;                  // LC, normalized like SPBC
  bool eigenvector_converged = true;
  double lambda_max = 0.0;
};

NodeMeasures node_measures(const Graph& graph, const TopoOptions& options = {});

/// Triangle count per node.
std::vector<double> triangle_counts(const Graph& graph);

/// Personalized PageRank matrix, row-major: entry (s, t) is the stationary
/// mass at t of the walk restarting at s. Each row sums to 1.
std::vector<double> personalized_pagerank(const Graph& graph, double restart = 0.15);

/// Hop distance for each requested pair; disconnected pairs map to n.
std::vector<double> shortest_path_hops(const Graph& graph, std::span<const NodePair> pairs);

/// Column ids in table order: 8 global, 14 pairwise, 20 node-based.
const std::vector<std::string>& topological_column_ids();
const std::vector<std::string>& global_column_ids();
const std::vector<std::string>& pairwise_column_ids();
const std::vector<std::string>& node_column_ids();

/// Global columns broadcast over `pairs`.
PairFeatureTable global_table(const Graph& graph, std::span<const NodePair> pairs);

/// The 14 pairwise scores. SP is stored negated (column "SP" holds -hops) so
/// that a larger value always means a more likely missing link.
PairFeatureTable pairwise_scores(const Graph& graph, std::span<const NodePair> pairs,
                                 const TopoOptions& options = {});

/// The 20 node-based columns, endpoint i being the smaller index.
PairFeatureTable node_features(const Graph& graph, std::span<const NodePair> pairs,
                               const TopoOptions& options = {});

/// All 42 topological columns.
PairFeatureTable topological_features(const Graph& graph, std::span<const NodePair> pairs,
                                      const TopoOptions& options = {});

}  // namespace stacklp
