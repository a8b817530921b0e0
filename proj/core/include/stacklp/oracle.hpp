#pragma once

#include <cstdint>

#include "stacklp/holdout.hpp"
#include "stacklp/synth.hpp"

namespace stacklp {

/// Largest fuzziness treated as the deep detectable regime for the closed form.
inline constexpr double kDeepDetectableEpsilon = 0.05;

/// Closed-form optimal AUC: 1/2 for ER, (2k - 1) / (2k) for Poisson SBM in
/// the deep detectable regime. Other specs throw ("use Monte Carlo").
double optimal_auc_exact(const SyntheticSpec& spec);

struct AucEstimate {
  double auc = 0.0;
  double standard_error = 0.0;  // binomial
  std::size_t samples = 0;
};

inline constexpr std::size_t kDefaultOracleSamples = 100000;

/// Monte-Carlo optimal AUC: compares planted scores of uniformly drawn
/// (held-out edge, true non-edge) pairs, ties counting 1/2.
AucEstimate optimal_auc_mc(const PlantedGraph& planted, const HoldoutSplit& split,
                           std::size_t samples, std::uint64_t seed, int workers = 1);

/// Same, drawing the holdout at rate `alpha` first.
AucEstimate optimal_auc_mc(const PlantedGraph& planted, std::size_t samples, std::uint64_t seed,
                           double alpha = 0.8, int workers = 1);

}  // namespace stacklp
