#include "stacklp/spectral_nb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"
#include "stacklp/error.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/sbm_mdl.hpp"

namespace stacklp {

namespace {

struct Clustering {
  std::vector<BlockId> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

Clustering lloyd(const detail::RowMatrix& points, std::size_t k, Rng& rng, int iterations) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto dims = points.cols();
  detail::RowMatrix centers(static_cast<Eigen::Index>(k), dims);

  // k-means++ seeding.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  centers.row(0) = points.row(static_cast<Eigen::Index>(first));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (points.row(static_cast<Eigen::Index>(i)) -
                        centers.row(static_cast<Eigen::Index>(c - 1)))
                           .squaredNorm();
      nearest[i] = std::min(nearest[i], d);
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
  }

  Clustering out;
  out.labels.assign(n, 0);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      BlockId label = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points.row(static_cast<Eigen::Index>(i)) -
                          centers.row(static_cast<Eigen::Index>(c)))
                             .squaredNorm();
        if (d < best) {
          best = d;
          label = static_cast<BlockId>(c);
        }
      }
      if (it == 0 || label != out.labels[i]) changed = true;
      out.labels[i] = label;
      inertia += best;
    }
    out.inertia = inertia;
    if (!changed) break;
    detail::RowMatrix sums = detail::RowMatrix::Zero(static_cast<Eigen::Index>(k), dims);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(out.labels[i]) += points.row(static_cast<Eigen::Index>(i));
      ++counts[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }
  return out;
}

}  // namespace

SpectralFit fit_spectral_nb(const Graph& graph, std::uint64_t seed,
                            const SpectralOptions& options) {
  const std::size_t n = graph.node_count();
  require(n > 0, "cannot fit an empty graph");
  SpectralFit fit;
  double sum_d = 0.0, sum_d2 = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const double d = static_cast<double>(graph.degree(v));
    sum_d += d;
    sum_d2 += d * d;
  }
  if (sum_d == 0.0) {
    fit.partition = Partition::single_block(graph);
    return fit;
  }
  const double r = std::sqrt(std::max(0.0, sum_d2 / sum_d - 1.0));
  fit.radius = r;

  Eigen::MatrixXd hessian = -r * detail::dense_adjacency(graph);
  for (NodeId v = 0; v < n; ++v) {
    hessian(v, v) = r * r - 1.0 + static_cast<double>(graph.degree(v));
  }
  const auto pairs = detail::symmetric_eigen_below(hessian, 0.0);
  const std::size_t cap = options.max_groups ? options.max_groups : default_max_blocks(n);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(pairs.values.size()), 1, cap);
  fit.estimated_k = k;
  if (k == 1) {
    fit.partition = Partition::single_block(graph);
    return fit;
  }

  const detail::RowMatrix points = pairs.vectors.leftCols(static_cast<Eigen::Index>(k));
  Rng rng(derive_seed(seed, 0x5e));
  Clustering best;
  for (int restart = 0; restart < std::max(1, options.kmeans_restarts); ++restart) {
    Clustering c = lloyd(points, k, rng, options.kmeans_iterations);
    if (c.inertia < best.inertia) best = std::move(c);
  }
  fit.partition = Partition(graph, best.labels);
  return fit;
}

}  // namespace stacklp
