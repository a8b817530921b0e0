#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stacklp {

using NodeId = std::uint32_t;

/// Unordered node pair, always stored with first < second.
struct NodePair {
  NodeId first = 0;
  NodeId second = 0;

  NodePair() = default;
  NodePair(NodeId a, NodeId b) : first(a < b ? a : b), second(a < b ? b : a) {}

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct NodePairHash {
  std::size_t operator()(const NodePair& p) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{p.first} << 32) | p.second);
  }
};

/// Counters reported while ingesting an edge list.
struct IngestStats {
  std::size_t records = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
};

/// Immutable simple undirected graph on dense node indices [0, n).
///
/// Adjacency lists are sorted, so edge tests are a binary search in the
/// shorter list. Isolated nodes are allowed and are kept by every derived
/// graph so that n stays fixed across holdout operations.
class Graph {
 public:
  Graph() = default;

  /// Builds from index pairs. Self-loops and duplicates are dropped and
  /// counted in `stats` when given. Throws on indices >= node_count.
  static Graph from_pairs(std::size_t node_count, std::span<const NodePair> edges,
                          IngestStats* stats = nullptr);
  static Graph from_pairs(std::size_t node_count,
                          std::span<const std::pair<NodeId, NodeId>> edges,
                          IngestStats* stats = nullptr);

  /// Builds from token records, assigning dense indices in first-seen order.
  static Graph from_edge_list(std::span<const std::pair<std::string, std::string>> records,
                              IngestStats* stats = nullptr);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId a, NodeId b) const noexcept;

  /// Canonical edge list, sorted lexicographically.
  std::span<const NodePair> edges() const noexcept { return edges_; }

  /// Original node tokens by dense index; empty when built from indices.
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::string label(NodeId v) const;
  std::optional<NodeId> index_of(std::string_view token) const;

  /// Copy without `subset`. Throws when the subset contains a non-edge.
  Graph remove_edges(std::span<const NodePair> subset) const;

  /// Graph with node v renamed to permutation[v].
  Graph relabel(std::span<const NodeId> permutation) const;

  /// Content hash over (n, edges); used to verify immutability.
  std::uint64_t fingerprint() const noexcept;

  /// Number of unordered non-adjacent pairs, C(n,2) - m.
  std::uint64_t non_edge_count() const noexcept;

  /// Calls fn(i, j) for every unordered non-edge with i < j, in lexicographic order.
  template <class Fn>
  void for_each_non_edge(Fn&& fn) const {
    const auto n = static_cast<NodeId>(node_count());
    for (NodeId i = 0; i < n; ++i) {
      auto nb = neighbors(i);
      auto it = std::upper_bound(nb.begin(), nb.end(), i);
      for (NodeId j = i + 1; j < n; ++j) {
        if (it != nb.end() && *it == j) {
          ++it;
          continue;
        }
        fn(i, j);
      }
    }
  }

  std::vector<NodePair> non_edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_;
  }

 private:
  void build(std::size_t node_count, std::vector<NodePair> edges);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<NodePair> edges_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Reads the edge-list text format: one edge per line, two whitespace
/// separated tokens, lines starting with '#' and blank lines ignored.
/// Throws Error(kIo) naming the offending line.
Graph read_edge_list(std::istream& in, IngestStats* stats = nullptr);
Graph read_edge_list_file(const std::string& path, IngestStats* stats = nullptr);

/// Writes edges using node labels when present, otherwise indices.
void write_edge_list(std::ostream& out, const Graph& graph);
void write_edge_list_file(const std::string& path, const Graph& graph);

}  // namespace stacklp
