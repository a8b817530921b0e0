#include "stacklp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stacklp/error.hpp"

namespace stacklp {

double auc(std::span<const double> positive, std::span<const double> negative) {
  require(!positive.empty() && !negative.empty(), "AUC needs at least one positive and one negative");
  std::vector<double> sorted(negative.begin(), negative.end());
  for (double x : sorted) require(!std::isnan(x), "AUC scores must not be NaN");
  std::sort(sorted.begin(), sorted.end());
  // Doubled win count: 2 per strict win, 1 per tie.
  std::uint64_t doubled = 0;
  for (double p : positive) {
    require(!std::isnan(p), "AUC scores must not be NaN");
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
    const auto hi = std::upper_bound(lo, sorted.end(), p);
    doubled += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(doubled) /
         (2.0 * static_cast<double>(positive.size()) * static_cast<double>(negative.size()));
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  require(scores.size() == labels.size(), "scores and labels differ in length");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == Label::kPositive ? pos : neg).push_back(scores[i]);
  }
  return auc(pos, neg);
}

PrecisionRecall precision_recall(std::span<const double> scores, std::span<const Label> labels,
                                 double threshold, double negative_weight) {
  require(scores.size() == labels.size(), "scores and labels differ in length");
  require(negative_weight > 0.0, "negative weight must be positive");
  PrecisionRecall pr;
  double positives = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool actual = labels[i] == Label::kPositive;
    const bool predicted = scores[i] >= threshold;
    positives += actual ? 1.0 : 0.0;
    if (actual && predicted) pr.true_positives += 1.0;
    if (!actual && predicted) pr.false_positives += negative_weight;
    if (actual && !predicted) pr.false_negatives += 1.0;
  }
  require(positives > 0.0, "precision and recall need at least one positive");
  const double predicted = pr.true_positives + pr.false_positives;
  pr.no_predicted_positives = predicted == 0.0;
  pr.precision = predicted > 0.0 ? pr.true_positives / predicted : 0.0;
  pr.recall = pr.true_positives / positives;
  const double denom = pr.precision + pr.recall;
  pr.f1 = denom > 0.0 ? 2.0 * pr.precision * pr.recall / denom : 0.0;
  return pr;
}

double best_f1_threshold(std::span<const double> scores, std::span<const Label> labels,
                         std::span<const double> candidates, double negative_weight) {
  require(!candidates.empty(), "threshold search needs candidates");
  double best_cut = candidates.front();
  double best_f1 = -1.0;
  for (double cut : candidates) {
    const double f1 = precision_recall(scores, labels, cut, negative_weight).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_cut = cut;
    }
  }
  return best_cut;
}

std::vector<double> unit_threshold_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = i / 100.0;
  return grid;
}

std::vector<double> quantile_threshold_grid(std::span<const double> scores) {
  require(!scores.empty(), "quantile grid needs scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  grid.reserve(101);
  for (int i = 0; i <= 100; ++i) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(sorted.size() - 1) * i / 100.0));
    grid.push_back(sorted[idx]);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace stacklp
