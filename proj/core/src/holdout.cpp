#include "stacklp/holdout.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stacklp/error.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

std::size_t round_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

// Uniform subsample of the non-edges of `graph`, skipping pairs in `exclude`.
// Draws by rejection over all pairs when the graph is sparse enough, otherwise
// by enumerating the complement.
std::vector<NodePair> sample_non_edges(const Graph& graph, std::size_t count,
                                       const std::unordered_set<NodePair, NodePairHash>& exclude,
                                       Rng& rng) {
  const std::uint64_t n = graph.node_count();
  const std::uint64_t available = graph.non_edge_count() - exclude.size();
  std::vector<NodePair> out;
  if (count >= available) {
    graph.for_each_non_edge([&](NodeId i, NodeId j) {
      if (!exclude.contains(NodePair(i, j))) out.emplace_back(i, j);
    });
    return out;
  }
  const std::uint64_t all_pairs = n * (n - 1) / 2;
  if (available * 2 >= all_pairs) {
    std::unordered_set<NodePair, NodePairHash> chosen;
    chosen.reserve(count * 2);
    while (out.size() < count) {
      const auto i = static_cast<NodeId>(rng.below(n));
      const auto j = static_cast<NodeId>(rng.below(n));
      if (i == j) continue;
      NodePair p(i, j);
      if (graph.has_edge(p.first, p.second) || exclude.contains(p)) continue;
      if (chosen.insert(p).second) out.push_back(p);
    }
  } else {
    std::vector<NodePair> pool;
    pool.reserve(available);
    graph.for_each_non_edge([&](NodeId i, NodeId j) {
      if (!exclude.contains(NodePair(i, j))) pool.emplace_back(i, j);
    });
    for (std::size_t idx : rng.sample_without_replacement(pool.size(), count)) {
      out.push_back(pool[idx]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

HoldoutSplit sample_holdout(const Graph& graph, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    fail(ErrorCategory::kInvalidArgument, "alpha must lie in (0, 1]");
  }
  if (graph.edge_count() < 1) fail(ErrorCategory::kData, "graph has no edges to hold out");
  const std::size_t m = graph.edge_count();
  const std::size_t keep = round_count(alpha, m);
  Rng rng(derive_seed(seed, 0x401d));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  HoldoutSplit split;
  split.alpha = alpha;
  split.seed = seed;
  auto edges = graph.edges();
  for (std::size_t k = keep; k < m; ++k) split.holdout_edges.push_back(edges[order[k]]);
  std::sort(split.holdout_edges.begin(), split.holdout_edges.end());
  split.observed = graph.remove_edges(split.holdout_edges);
  return split;
}

LabeledPairs build_training_instance(const HoldoutSplit& split, double alpha_prime,
                                     std::uint64_t seed, std::size_t negative_cap) {
  if (!(alpha_prime > 0.0 && alpha_prime < 1.0)) {
    fail(ErrorCategory::kInvalidArgument, "alpha_prime must lie in (0, 1)");
  }
  const Graph& observed = split.observed;
  const std::size_t m = observed.edge_count();
  if (m < 2) fail(ErrorCategory::kData, "graph too small to train");
  std::size_t positives = round_count(1.0 - alpha_prime, m);
  positives = std::clamp<std::size_t>(positives, 1, m - 1);

  Rng rng(derive_seed(seed, 0x7a1));
  std::vector<NodePair> removed;
  auto edges = observed.edges();
  for (std::size_t idx : rng.sample_without_replacement(m, positives)) {
    removed.push_back(edges[idx]);
  }
  std::sort(removed.begin(), removed.end());

  LabeledPairs out;
  out.feature_graph = observed.remove_edges(removed);
  out.negatives_available = observed.non_edge_count();
  std::vector<NodePair> negatives;
  if (negative_cap > 0 && negative_cap < out.negatives_available) {
    negatives = sample_non_edges(observed, negative_cap, {}, rng);
    out.negatives_capped = true;
  } else {
    negatives = observed.non_edges();
  }
  out.pairs = std::move(removed);
  out.labels.assign(out.pairs.size(), Label::kPositive);
  out.positive_count = out.pairs.size();
  out.negative_count = negatives.size();
  out.pairs.insert(out.pairs.end(), negatives.begin(), negatives.end());
  out.labels.resize(out.pairs.size(), Label::kNegative);
  return out;
}

CandidateSet build_candidates(const HoldoutSplit& split, std::uint64_t seed,
                              std::size_t negative_cap) {
  CandidateSet out;
  const Graph& observed = split.observed;
  const std::unordered_set<NodePair, NodePairHash> holdout(split.holdout_edges.begin(),
                                                           split.holdout_edges.end());
  out.negatives_available = observed.non_edge_count() - holdout.size();
  if (negative_cap == 0 || negative_cap >= out.negatives_available) {
    out.pairs.reserve(observed.non_edge_count());
    observed.for_each_non_edge([&](NodeId i, NodeId j) {
      NodePair p(i, j);
      out.pairs.push_back(p);
      out.labels.push_back(holdout.contains(p) ? Label::kPositive : Label::kNegative);
    });
    return out;
  }
  Rng rng(derive_seed(seed, 0xca4d));
  auto negatives = sample_non_edges(observed, negative_cap, holdout, rng);
  out.pairs = split.holdout_edges;
  out.labels.assign(out.pairs.size(), Label::kPositive);
  out.pairs.insert(out.pairs.end(), negatives.begin(), negatives.end());
  out.labels.resize(out.pairs.size(), Label::kNegative);
  out.negative_weight =
      static_cast<double>(out.negatives_available) / static_cast<double>(negatives.size());
  return out;
}

std::vector<Fold> kfold(std::span<const Label> labels, int folds, std::uint64_t seed) {
  if (folds < 2) fail(ErrorCategory::kInvalidArgument, "kfold: need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Label::kPositive ? pos : neg).push_back(i);
  }
  if (pos.size() < static_cast<std::size_t>(folds)) {
    fail(ErrorCategory::kData, "kfold: " + std::to_string(pos.size()) +
                                   " positives is fewer than " + std::to_string(folds) +
                                   " folds");
  }
  Rng rng(derive_seed(seed, 0xf01d));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold_of(labels.size(), 0);
  for (std::size_t k = 0; k < pos.size(); ++k) fold_of[pos[k]] = static_cast<int>(k % folds);
  for (std::size_t k = 0; k < neg.size(); ++k) fold_of[neg[k]] = static_cast<int>(k % folds);

  std::vector<Fold> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold_of[i] == f ? out[f].validate : out[f].train).push_back(i);
    }
  }
  return out;
}

}  // namespace stacklp
