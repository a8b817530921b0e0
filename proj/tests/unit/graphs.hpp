#pragma once

#include <vector>

#include "stacklp/graph.hpp"

namespace stacklp::testing {

inline Graph make_graph(std::size_t n, std::vector<NodePair> edges) { return Graph::from_pairs(n, edges); }

inline Graph path_graph(std::size_t n) {
  std::vector<NodePair> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<NodePair> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return make_graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<NodePair> e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return make_graph(n, e);
}

inline Graph star_graph(std::size_t leaves) {
  std::vector<NodePair> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

/// Two cliques of `size` nodes, nodes [0, size) and [size, 2 size), joined
/// by the edge (size - 1, size).
inline Graph two_cliques(std::size_t size) {
  std::vector<NodePair> e;
  for (NodeId base : {NodeId{0}, static_cast<NodeId>(size)}) {
    for (NodeId i = 0; i < size; ++i) {
      for (NodeId j = i + 1; j < size; ++j) e.emplace_back(base + i, base + j);
    }
  }
  e.emplace_back(static_cast<NodeId>(size - 1), static_cast<NodeId>(size));
  return make_graph(2 * size, e);
}

}  // namespace stacklp::testing
