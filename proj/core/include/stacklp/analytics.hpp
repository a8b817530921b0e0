#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stacklp/feature_table.hpp"

namespace stacklp {

/// Shannon entropy (bits) of the normalized importance vector.
double importance_entropy(std::span<const double> importances);

/// Best-fitting "top x%" model: 90% of the mass spread evenly over the top
/// `count` predictors and 10% over the rest.
struct TopXFit {
  std::size_t count = 0;
  double percent = 0.0;  // 100 * count / F
  double model_entropy = 0.0;
  double empirical_entropy = 0.0;
};

/// Entropy of the 90/10 model with `count` of `total` predictors on top.
double top_x_model_entropy(std::size_t count, std::size_t total);

/// Scans count = 1..F-1 and keeps the smallest count whose model entropy is
/// closest to the empirical entropy.
TopXFit fit_top_x(std::span<const double> importances);

/// Entropy (bits) of importance mass aggregated by group. Throws when a
/// column id has no group.
double family_entropy(std::span<const double> importances, std::span<const std::string> column_ids,
                      const std::map<std::string, std::string>& group_of);
/// Groups by each column's predictor family.
double family_entropy(std::span<const double> importances, std::span<const ColumnInfo> columns);

struct LorenzCurve {
  /// (cumulative feature share, cumulative importance share), ascending
  /// importance, from (0, 0) to (1, 1).
  std::vector<std::pair<double, double>> points;
  double gini = 0.0;
};

/// Lorenz curve and Gini coefficient, 1 - 2 * (trapezoid area under the curve).
LorenzCurve lorenz_gini(std::span<const double> importances);

/// Equal-width histogram of `values` over [lo, hi]; values outside are clamped.
std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

}  // namespace stacklp
