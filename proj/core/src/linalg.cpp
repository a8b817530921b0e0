#include "linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stacklp/error.hpp"

namespace stacklp::detail {

Eigen::MatrixXd dense_adjacency(const Graph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : graph.edges()) {
    a(e.first, e.second) = 1.0;
    a(e.second, e.first) = 1.0;
  }
  return a;
}

namespace {

EigenPairs run_syevr(const Eigen::MatrixXd& matrix, char range, double vl, double vu, int il,
                     int iu) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  EigenPairs out;
  if (n == 0) return out;
  Eigen::MatrixXd work = matrix;  // column-major, destroyed by LAPACK
  const lapack_int max_count = range == 'I' ? (iu - il + 1) : n;
  std::vector<double> values(static_cast<std::size_t>(n));
  Eigen::MatrixXd vectors(n, std::max<lapack_int>(max_count, 1));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', range, 'U', n, work.data(), n, vl, vu, il, iu, 0.0, &found,
      values.data(), vectors.data(), n, support.data());
  if (info != 0) fail(ErrorCategory::kInternal, "dsyevr failed, info=" + std::to_string(info));
  out.values = Eigen::Map<Eigen::VectorXd>(values.data(), found);
  out.vectors = vectors.leftCols(found);
  return out;
}

}  // namespace

EigenPairs symmetric_eigen_range(const Eigen::MatrixXd& matrix, int lo, int hi) {
  if (hi < lo) return {};
  return run_syevr(matrix, 'I', 0.0, 0.0, lo + 1, hi + 1);
}

EigenPairs symmetric_eigen_below(const Eigen::MatrixXd& matrix, double upper) {
  // Gershgorin lower bound keeps the search interval finite.
  double lower = upper;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double radius = matrix.col(i).cwiseAbs().sum() - std::abs(matrix(i, i));
    lower = std::min(lower, matrix(i, i) - radius);
  }
  if (lower >= upper) return {};
  return run_syevr(matrix, 'V', lower - 1.0, upper, 0, 0);
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  if (n == 0) return {};
  Eigen::MatrixXd work = matrix;
  Eigen::VectorXd values(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, values.data());
  if (info != 0) fail(ErrorCategory::kInternal, "dsyevd failed, info=" + std::to_string(info));
  return values;
}

Eigen::MatrixXd adjacency_times(const Graph& graph, const Eigen::MatrixXd& block) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, block.cols());
  for (Eigen::Index v = 0; v < n; ++v) {
    for (NodeId u : graph.neighbors(static_cast<NodeId>(v))) out.row(v) += block.row(u);
  }
  return out;
}

}  // namespace stacklp::detail
