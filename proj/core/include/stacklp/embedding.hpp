#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stacklp/feature_table.hpp"
#include "stacklp/graph.hpp"

namespace stacklp {

struct EmbeddingParams {
  std::size_t dims = 32;
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 40;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 3;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of this value
  int workers = 1;               // walk generation; training too when hogwild
  bool hogwild = false;          // lock-free parallel training, not reproducible
};

/// Node vectors (n x dims, row-major). Isolated nodes get the zero vector.
struct Embedding {
  std::size_t dims = 0;
  std::vector<double> vectors;
  EmbeddingParams params;
  std::uint64_t seed = 0;
  /// Mean negative-sampling loss per training pair, one entry per epoch.
  std::vector<double> epoch_loss;
  bool deterministic = true;

  std::size_t node_count() const { return dims ? vectors.size() / dims : 0; }
  std::span<const double> row(NodeId v) const { return {vectors.data() + v * dims, dims}; }

  /// CSV `node,v0,...,v{d-1}`; node labels from `graph` when given.
  void write_csv(std::ostream& out, const Graph* graph = nullptr) const;
};

/// Uniform random walks from every non-isolated node, in (round, start node)
/// order. Each walk has its own seed stream.
std::vector<std::vector<NodeId>> random_walks(const Graph& graph, std::size_t walks_per_node,
                                              std::size_t walk_length, std::uint64_t seed,
                                              int workers = 1);

/// DeepWalk: skip-gram with negative sampling over a fixed walk corpus.
Embedding deepwalk_embed(const Graph& graph, const EmbeddingParams& params, std::uint64_t seed);

/// Column ids EMB_H0..EMB_H{d-1}, EMB_DOT, EMB_SIGDOT, EMB_NEGDIST.
std::vector<std::string> embedding_column_ids(std::size_t dims);

/// Hadamard products per dimension, the dot product, its logistic sigmoid
/// and the negated Euclidean distance.
PairFeatureTable pair_embed_features(const Embedding& embedding, std::span<const NodePair> pairs);

}  // namespace stacklp
