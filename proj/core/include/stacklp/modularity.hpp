#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"

namespace stacklp {

/// Newman-Girvan modularity from block statistics,
/// Q = sum_r (m_rr / m - (d_r / 2m)^2). Zero for an edgeless graph.
double modularity(const Graph& graph, const Partition& partition);

/// Greedy agglomerative maximization (Clauset-Newman-Moore) followed by one
/// pass of single-node moves in seeded order.
Partition fit_modularity(const Graph& graph, std::uint64_t seed);

/// Change in modularity from adding edge (i, j), partition held fixed.
std::vector<double> score_modularity(const Graph& graph, const Partition& partition,
                                     std::span<const NodePair> pairs);

}  // namespace stacklp
