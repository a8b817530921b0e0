#include "stacklp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stacklp/error.hpp"

namespace stacklp {

namespace {

constexpr double kTopMass = 0.9;

double checked_total(std::span<const double> importances) {
  require(!importances.empty(), "importance vector is empty");
  double total = 0.0;
  for (double x : importances) {
    require(std::isfinite(x) && x >= 0.0, "importances must be finite and non-negative");
    total += x;
  }
  require(total > 0.0, "importances sum to zero");
  return total;
}

double entropy_of(std::span<const double> mass, double total) {
  double h = 0.0;
  for (double x : mass) {
    if (x <= 0.0) continue;
    const double p = x / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double importance_entropy(std::span<const double> importances) {
  return entropy_of(importances, checked_total(importances));
}

double top_x_model_entropy(std::size_t count, std::size_t total) {
  require(count >= 1 && count <= total, "top count out of range");
  if (count == total) return std::log2(static_cast<double>(total));
  const double top = static_cast<double>(count);
  const double rest = static_cast<double>(total - count);
  return -kTopMass * std::log2(kTopMass / top) - (1.0 - kTopMass) * std::log2((1.0 - kTopMass) / rest);
}

TopXFit fit_top_x(std::span<const double> importances) {
  TopXFit fit;
  fit.empirical_entropy = importance_entropy(importances);
  const std::size_t total = importances.size();
  const std::size_t last = total > 1 ? total - 1 : 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 1; c <= last; ++c) {
    const double h = top_x_model_entropy(c, total);
    const double gap = std::abs(h - fit.empirical_entropy);
    if (gap < best) {
      best = gap;
      fit.count = c;
      fit.model_entropy = h;
    }
  }
  fit.percent = 100.0 * static_cast<double>(fit.count) / static_cast<double>(total);
  return fit;
}

double family_entropy(std::span<const double> importances, std::span<const std::string> column_ids,
                      const std::map<std::string, std::string>& group_of) {
  require(importances.size() == column_ids.size(), "importances and column ids differ in length");
  const double total = checked_total(importances);
  std::map<std::string, double> mass;
  for (std::size_t i = 0; i < importances.size(); ++i) {
    const auto it = group_of.find(column_ids[i]);
    if (it == group_of.end()) fail(ErrorCategory::kInvalidArgument, "column '" + column_ids[i] + "' has no family");
    mass[it->second] += importances[i];
  }
  std::vector<double> grouped;
  for (const auto& [name, m] : mass) grouped.push_back(m);
  return entropy_of(grouped, total);
}

double family_entropy(std::span<const double> importances, std::span<const ColumnInfo> columns) {
  std::vector<std::string> ids;
  std::map<std::string, std::string> group_of;
  for (const auto& c : columns) {
    ids.push_back(c.id);
    group_of[c.id] = family_name(c.family);
  }
  return family_entropy(importances, ids, group_of);
}

LorenzCurve lorenz_gini(std::span<const double> importances) {
  const double total = checked_total(importances);
  std::vector<double> sorted(importances.begin(), importances.end());
  std::sort(sorted.begin(), sorted.end());
  const double f = static_cast<double>(sorted.size());
  LorenzCurve curve;
  curve.points.reserve(sorted.size() + 1);
  curve.points.emplace_back(0.0, 0.0);
  double cumulative = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double prev = cumulative;
    cumulative += sorted[i];
    const double share = i + 1 == sorted.size() ? 1.0 : cumulative / total;
    area += (prev / total + share) / (2.0 * f);
    curve.points.emplace_back(static_cast<double>(i + 1) / f, share);
  }
  curve.gini = 1.0 - 2.0 * area;
  return curve;
}

std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  require(bins >= 1 && hi > lo, "histogram needs at least one bin and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : values) {
    if (std::isnan(x)) continue;
    const double pos = std::floor((x - lo) / width);
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++counts[idx];
  }
  return counts;
}

}  // namespace stacklp
