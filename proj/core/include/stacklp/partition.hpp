#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stacklp/graph.hpp"

namespace stacklp {

using BlockId = std::uint32_t;

/// Node-to-community map with block statistics.
///
/// Block ids are canonical: numbered by first appearance in node order, so
/// two assignments describing the same grouping compare equal.
class Partition {
 public:
  Partition() = default;
  Partition(const Graph& graph, std::span<const BlockId> assignment);

  /// Every node in one block.
  static Partition single_block(const Graph& graph);

  std::size_t node_count() const { return assignment_.size(); }
  std::size_t k() const { return sizes_.size(); }
  BlockId block_of(NodeId v) const { return assignment_[v]; }
  const std::vector<BlockId>& assignment() const { return assignment_; }

  /// n_r.
  std::size_t block_size(BlockId r) const { return sizes_[r]; }
  /// d_r, the degree sum of block r.
  std::uint64_t block_degree(BlockId r) const { return degrees_[r]; }
  /// m_rs; m_rr counts within-block edges once.
  std::uint64_t block_edges(BlockId r, BlockId s) const { return edges_[r * k() + s]; }

  /// Recomputes the statistics from the assignment and compares.
  bool consistent_with(const Graph& graph) const;

  /// CSV `node,community`, node labels from `graph` when given.
  void write_csv(std::ostream& out, const Graph* graph = nullptr) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.assignment_ == b.assignment_;
  }

 private:
  std::vector<BlockId> assignment_;
  std::vector<std::size_t> sizes_;
  std::vector<std::uint64_t> degrees_;
  std::vector<std::uint64_t> edges_;  // k x k, symmetric
};

/// Relabels block ids by first appearance in node order.
std::vector<BlockId> canonical_labels(std::span<const BlockId> assignment);

}  // namespace stacklp
