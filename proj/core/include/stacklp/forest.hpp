#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stacklp/feature_table.hpp"
#include "stacklp/holdout.hpp"

namespace stacklp {

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 0;     // 0 = unlimited
  std::size_t min_leaf = 1;      // minimum rows (with bootstrap multiplicity) per leaf
  std::size_t max_features = 0;  // 0 = ceil(sqrt(F))
  bool bootstrap = true;
  bool class_weighted = true;  // Gini weights inversely proportional to class frequency
  std::size_t max_bins = 255;  // candidate thresholds per feature: max_bins - 1
  int workers = 1;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Flat binary tree. Internal nodes send `x[feature] <= threshold` left.
struct Tree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;  // leaf: weighted positive fraction
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaves() const;
};

/// Bagged CART ensemble with Gini splits over random feature subsets.
class Forest {
 public:
  Forest() = default;

  const ForestParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<ColumnInfo>& columns() const { return columns_; }
  const std::vector<Tree>& trees() const { return trees_; }

  /// Mean decrease in Gini impurity per column, averaged over trees and
  /// normalized to sum 1 (uniform when no tree ever split).
  const std::vector<double>& importances() const { return importances_; }

  /// Mean leaf value over trees for each row. Columns are matched by id, so
  /// the table may carry extra columns; a missing column is an error.
  std::vector<double> predict(const PairFeatureTable& table, int workers = 1) const;
  std::vector<double> predict(const PairFeatureTable& table, std::span<const std::size_t> rows,
                              int workers = 1) const;
  /// `row` is in the forest's own column order.
  double predict_row(std::span<const double> row) const;

  void write_json(std::ostream& out) const;
  static Forest read_json(std::istream& in);

  static constexpr int kFormatVersion = 1;

 private:
  friend Forest train_forest(const PairFeatureTable&, std::span<const Label>,
                             std::span<const std::size_t>, const ForestParams&, std::uint64_t);
  std::vector<std::size_t> column_map(const PairFeatureTable& table) const;

  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::vector<ColumnInfo> columns_;
  std::vector<Tree> trees_;
  std::vector<double> importances_;
};

/// Trains on the given rows of `features` (all columns). Labels are indexed
/// by table row. Throws "degenerate labels" unless both classes have at
/// least two rows, and on non-finite features.
Forest train_forest(const PairFeatureTable& features, std::span<const Label> labels,
                    std::span<const std::size_t> rows, const ForestParams& params, std::uint64_t seed);
Forest train_forest(const PairFeatureTable& features, std::span<const Label> labels,
                    const ForestParams& params, std::uint64_t seed);

}  // namespace stacklp
