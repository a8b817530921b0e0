#pragma once

#include <cstdint>
#include <vector>

#include "stacklp/graph.hpp"

namespace stacklp {

/// Observed graph G' = (V, E') and the held-out edges Y = E - E'.
struct HoldoutSplit {
  Graph observed;
  std::vector<NodePair> holdout_edges;
  double alpha = 1.0;
  std::uint64_t seed = 0;
};

enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

/// Level-1 training rows. Positives are edges removed from the observed
/// graph; negatives are non-edges of the observed graph. Features for these
/// pairs must be computed on `feature_graph` (the doubly reduced G'').
struct LabeledPairs {
  std::vector<NodePair> pairs;
  std::vector<Label> labels;
  Graph feature_graph;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  /// Non-edges of G' before any cap was applied.
  std::uint64_t negatives_available = 0;
  bool negatives_capped = false;
};

/// Keeps exactly round(alpha * m) edges chosen uniformly without replacement.
HoldoutSplit sample_holdout(const Graph& graph, double alpha, std::uint64_t seed);

/// Removes round((1 - alpha_prime) * |E'|) edges (at least one) from G' as
/// positives. All non-edges of G' become negatives unless `negative_cap` is
/// non-zero and smaller, in which case a uniform subsample of that size is
/// used.
LabeledPairs build_training_instance(const HoldoutSplit& split, double alpha_prime,
                                     std::uint64_t seed, std::size_t negative_cap = 0);

/// Test-time candidates: every non-edge of G' (which contains Y), labelled by
/// membership in Y. With a non-zero `negative_cap`, all of Y is kept and the
/// true non-edges are uniformly subsampled to the cap; `negative_weight`
/// then records how many true non-edges each kept one stands for.
struct CandidateSet {
  std::vector<NodePair> pairs;
  std::vector<Label> labels;
  std::uint64_t negatives_available = 0;
  double negative_weight = 1.0;
};

CandidateSet build_candidates(const HoldoutSplit& split, std::uint64_t seed,
                              std::size_t negative_cap = 0);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validate;
};

/// Stratified k-fold split over row indices. Every index lands in exactly
/// one validation fold.
std::vector<Fold> kfold(std::span<const Label> labels, int folds, std::uint64_t seed);

}  // namespace stacklp
