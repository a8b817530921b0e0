#pragma once

#include <cstdint>

#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"

namespace stacklp {

struct SpectralOptions {
  std::size_t max_groups = 0;  // 0 = default_max_blocks(n)
  int kmeans_restarts = 10;
  int kmeans_iterations = 100;
};

struct SpectralFit {
  Partition partition;
  std::size_t estimated_k = 1;
  double radius = 0.0;  // Bethe-Hessian parameter r
};

/// Community count from the number of negative eigenvalues of the Bethe
/// Hessian H(r) = (r^2 - 1) I - r A + D at r = sqrt(sum d^2 / sum d - 1),
/// then k-means on the matching eigenvectors. A count of 0 falls back to 1.
SpectralFit fit_spectral_nb(const Graph& graph, std::uint64_t seed,
                            const SpectralOptions& options = {});

}  // namespace stacklp
