#pragma once

// Internal dense linear-algebra helpers shared by the spectral predictors.

#include <Eigen/Dense>

#include "stacklp/graph.hpp"

namespace stacklp::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd dense_adjacency(const Graph& graph);

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // one column per value
};

/// Eigenpairs of a symmetric matrix with index range [lo, hi] (0-based,
/// ascending order).
EigenPairs symmetric_eigen_range(const Eigen::MatrixXd& matrix, int lo, int hi);

/// All eigenpairs with value strictly below `upper`.
EigenPairs symmetric_eigen_below(const Eigen::MatrixXd& matrix, double upper);

/// All eigenvalues, ascending.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix);

/// Sparse adjacency times a dense block.
Eigen::MatrixXd adjacency_times(const Graph& graph, const Eigen::MatrixXd& block);

}  // namespace stacklp::detail
