#pragma once

#include <cstdint>
#include <vector>

#include "stacklp/graph.hpp"

namespace stacklp {

/// Rank-r approximation A_r of the adjacency matrix, from its truncated SVD.
///
/// A is symmetric, so its SVD is the eigendecomposition restricted to the r
/// eigenvalues of largest magnitude. Only the factors are kept (O(n r)
/// memory); every accessor is an O(r) dot product.
class LowRankApprox {
 public:
  /// Truncated decomposition computed exactly (LAPACK MRRR).
  static LowRankApprox exact(const Graph& graph, std::size_t rank);

  /// Randomized subspace iteration: Gaussian sketch with `oversampling`
  /// extra columns, `power_steps` re-orthonormalized power steps, then a
  /// Rayleigh-Ritz projection.
  static LowRankApprox randomized(const Graph& graph, std::size_t rank, int power_steps,
                                  int oversampling, std::uint64_t seed);

  /// Default rank min(32, n - 1), at least 1.
  static std::size_t default_rank(std::size_t node_count);

  std::size_t rank() const { return values_.size(); }
  std::size_t node_count() const { return node_count_; }
  const std::vector<double>& singular_values() const { return singular_; }

  /// A_r(i, j).
  double entry(NodeId i, NodeId j) const;
  /// Dot product of columns i and j of A_r.
  double column_dot(NodeId i, NodeId j) const;
  /// Average of A_r(i, z) over neighbours z of j and of A_r(z, j) over
  /// neighbours z of i, averaged over the two directions. Empty
  /// neighbourhoods contribute 0.
  double neighbor_mean(NodeId i, NodeId j) const;

  /// ||A - A_r||_F, evaluated densely.
  double reconstruction_error(const Graph& graph) const;

 private:
  LowRankApprox(const Graph& graph, std::vector<double> values, std::vector<double> vectors);

  std::size_t node_count_ = 0;
  std::vector<double> values_;    // signed eigenvalues, rank
  std::vector<double> singular_;  // |values|, descending
  std::vector<double> u_;         // n x rank, row-major
  std::vector<double> nbr_;       // n x rank: mean of u over N(v)
};

}  // namespace stacklp
