#include "stacklp/oracle.hpp"

#include <cmath>

#include "stacklp/error.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

constexpr std::size_t kChunks = 16;

}  // namespace

double optimal_auc_exact(const SyntheticSpec& spec) {
  if (spec.degree_family != DegreeFamily::kPoisson) {
    fail(ErrorCategory::kInvalidArgument,
         "no closed form for degree-corrected spec '" + spec.name + "'; use Monte Carlo");
  }
  if (spec.k == 1) return 0.5;
  if (spec.fuzziness() > kDeepDetectableEpsilon) {
    fail(ErrorCategory::kInvalidArgument,
         "spec '" + spec.name + "' is outside the deep detectable regime; use Monte Carlo");
  }
  const double k = static_cast<double>(spec.k);
  return (2.0 * k - 1.0) / (2.0 * k);
}

AucEstimate optimal_auc_mc(const PlantedGraph& planted, const HoldoutSplit& split,
                           std::size_t samples, std::uint64_t seed, int workers) {
  require(samples >= 1, "oracle needs at least one sample");
  const Graph& truth = planted.graph;
  const std::size_t n = truth.node_count();
  if (split.holdout_edges.empty()) fail(ErrorCategory::kData, "oracle: empty holdout set");
  if (truth.non_edge_count() == 0) fail(ErrorCategory::kData, "oracle: graph has no non-edges");

  // Twice the win count (ties add 1) per chunk, summed as integers.
  std::vector<std::uint64_t> doubled(kChunks, 0);
  parallel_for(kChunks, workers, [&](std::size_t chunk) {
    const std::size_t begin = chunk * samples / kChunks;
    const std::size_t end = (chunk + 1) * samples / kChunks;
    Rng rng(derive_seed(seed, chunk));
    std::uint64_t acc = 0;
    for (std::size_t s = begin; s < end; ++s) {
      const NodePair te = split.holdout_edges[rng.below(split.holdout_edges.size())];
      NodeId a = 0, b = 0;
      do {
        a = static_cast<NodeId>(rng.below(n));
        b = static_cast<NodeId>(rng.below(n));
      } while (a == b || truth.has_edge(a, b));
      const double pos = planted.planted_rate(te.first, te.second);
      const double neg = planted.planted_rate(a, b);
      acc += pos > neg ? 2 : (pos == neg ? 1 : 0);
    }
    doubled[chunk] = acc;
  });
  std::uint64_t total = 0;
  for (auto d : doubled) total += d;
  AucEstimate est;
  est.samples = samples;
  est.auc = static_cast<double>(total) / (2.0 * static_cast<double>(samples));
  est.standard_error = std::sqrt(est.auc * (1.0 - est.auc) / static_cast<double>(samples));
  return est;
}

AucEstimate optimal_auc_mc(const PlantedGraph& planted, std::size_t samples, std::uint64_t seed,
                           double alpha, int workers) {
  const HoldoutSplit split = sample_holdout(planted.graph, alpha, derive_seed(seed, 0x0a));
  return optimal_auc_mc(planted, split, samples, derive_seed(seed, 0x0b), workers);
}

}  // namespace stacklp
