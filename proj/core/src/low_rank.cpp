#include "stacklp/low_rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linalg.hpp"
#include "stacklp/error.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

// Keeps the `rank` eigenpairs of largest |value|, ordered by |value|
// descending (ties by signed value, descending).
void select_by_magnitude(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                         std::size_t rank, std::vector<double>& out_values,
                         std::vector<double>& out_vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a] > values[b];
  });
  order.resize(std::min<std::size_t>(rank, order.size()));
  const auto n = static_cast<std::size_t>(vectors.rows());
  out_values.clear();
  out_vectors.assign(n * order.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out_values.push_back(values[order[k]]);
    for (std::size_t v = 0; v < n; ++v) {
      out_vectors[v * order.size() + k] = vectors(static_cast<Eigen::Index>(v), order[k]);
    }
  }
}

}  // namespace

std::size_t LowRankApprox::default_rank(std::size_t node_count) {
  return std::max<std::size_t>(1, std::min<std::size_t>(32, node_count > 0 ? node_count - 1 : 0));
}

LowRankApprox::LowRankApprox(const Graph& graph, std::vector<double> values,
                             std::vector<double> vectors)
    : node_count_(graph.node_count()), values_(std::move(values)), u_(std::move(vectors)) {
  const std::size_t r = values_.size();
  singular_.resize(r);
  for (std::size_t k = 0; k < r; ++k) singular_[k] = std::abs(values_[k]);
  nbr_.assign(node_count_ * r, 0.0);
  for (NodeId v = 0; v < node_count_; ++v) {
    auto nb = graph.neighbors(v);
    if (nb.empty()) continue;
    double* dst = nbr_.data() + static_cast<std::size_t>(v) * r;
    for (NodeId z : nb) {
      const double* src = u_.data() + static_cast<std::size_t>(z) * r;
      for (std::size_t k = 0; k < r; ++k) dst[k] += src[k];
    }
    const double inv = 1.0 / static_cast<double>(nb.size());
    for (std::size_t k = 0; k < r; ++k) dst[k] *= inv;
  }
}

LowRankApprox LowRankApprox::exact(const Graph& graph, std::size_t rank) {
  const std::size_t n = graph.node_count();
  if (rank < 1 || rank > n) {
    fail(ErrorCategory::kInvalidArgument,
         "low-rank approximation: rank " + std::to_string(rank) + " outside [1, " +
             std::to_string(n) + "]");
  }
  const Eigen::MatrixXd a = detail::dense_adjacency(graph);
  const int ni = static_cast<int>(n);
  const int r = static_cast<int>(rank);
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (2 * r >= ni) {
    auto all = detail::symmetric_eigen_range(a, 0, ni - 1);
    values = all.values;
    vectors = all.vectors;
  } else {
    // The r largest-magnitude eigenvalues are among the r lowest and r highest.
    auto low = detail::symmetric_eigen_range(a, 0, r - 1);
    auto high = detail::symmetric_eigen_range(a, ni - r, ni - 1);
    values.resize(low.values.size() + high.values.size());
    values << low.values, high.values;
    vectors.resize(static_cast<Eigen::Index>(n), values.size());
    vectors << low.vectors, high.vectors;
  }
  std::vector<double> vals, vecs;
  select_by_magnitude(values, vectors, rank, vals, vecs);
  return LowRankApprox(graph, std::move(vals), std::move(vecs));
}

LowRankApprox LowRankApprox::randomized(const Graph& graph, std::size_t rank, int power_steps,
                                        int oversampling, std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  if (rank < 1 || rank > n) {
    fail(ErrorCategory::kInvalidArgument,
         "low-rank approximation: rank " + std::to_string(rank) + " outside [1, " +
             std::to_string(n) + "]");
  }
  const auto width = static_cast<Eigen::Index>(
      std::min<std::size_t>(n, rank + static_cast<std::size_t>(std::max(0, oversampling))));
  const auto rows = static_cast<Eigen::Index>(n);
  Rng rng(derive_seed(seed, 0x5bd));
  Eigen::MatrixXd sketch(rows, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index v = 0; v < rows; ++v) sketch(v, c) = rng.normal();
  }
  auto orthonormalize = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  };
  Eigen::MatrixXd q = orthonormalize(detail::adjacency_times(graph, sketch));
  for (int step = 0; step < power_steps; ++step) {
    q = orthonormalize(detail::adjacency_times(graph, q));
  }
  const Eigen::MatrixXd aq = detail::adjacency_times(graph, q);
  Eigen::MatrixXd projected = q.transpose() * aq;
  projected = 0.5 * (projected + projected.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
  const Eigen::MatrixXd ritz = q * small.eigenvectors();
  std::vector<double> vals, vecs;
  select_by_magnitude(small.eigenvalues(), ritz, rank, vals, vecs);
  return LowRankApprox(graph, std::move(vals), std::move(vecs));
}

double LowRankApprox::entry(NodeId i, NodeId j) const {
  const std::size_t r = values_.size();
  const double* ui = u_.data() + static_cast<std::size_t>(i) * r;
  const double* uj = u_.data() + static_cast<std::size_t>(j) * r;
  double s = 0.0;
  for (std::size_t k = 0; k < r; ++k) s += values_[k] * ui[k] * uj[k];
  return s;
}

double LowRankApprox::column_dot(NodeId i, NodeId j) const {
  const std::size_t r = values_.size();
  const double* ui = u_.data() + static_cast<std::size_t>(i) * r;
  const double* uj = u_.data() + static_cast<std::size_t>(j) * r;
  double s = 0.0;
  for (std::size_t k = 0; k < r; ++k) s += values_[k] * values_[k] * ui[k] * uj[k];
  return s;
}

double LowRankApprox::neighbor_mean(NodeId i, NodeId j) const {
  // mean_{z in N(j)} A_r(i, z) = sum_k lambda_k u_ik * mean_{z in N(j)} u_zk
  const std::size_t r = values_.size();
  const double* ui = u_.data() + static_cast<std::size_t>(i) * r;
  const double* uj = u_.data() + static_cast<std::size_t>(j) * r;
  const double* wi = nbr_.data() + static_cast<std::size_t>(i) * r;
  const double* wj = nbr_.data() + static_cast<std::size_t>(j) * r;
  double s = 0.0;
  for (std::size_t k = 0; k < r; ++k) s += values_[k] * (ui[k] * wj[k] + uj[k] * wi[k]);
  return 0.5 * s;
}

double LowRankApprox::reconstruction_error(const Graph& graph) const {
  double total = 0.0;
  for (NodeId i = 0; i < node_count_; ++i) {
    for (NodeId j = 0; j < node_count_; ++j) {
      const double diff = (graph.has_edge(i, j) ? 1.0 : 0.0) - entry(i, j);
      total += diff * diff;
    }
  }
  return std::sqrt(total);
}

}  // namespace stacklp
