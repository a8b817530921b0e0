#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stacklp/holdout.hpp"

namespace stacklp {

/// Probability that a random positive outscores a random negative, ties
/// counted one half. Sort-and-search in O((P + N) log N); the win count is
/// kept as an exact integer, so the value equals all-pairs counting.
double auc(std::span<const double> positive, std::span<const double> negative);
double auc(std::span<const double> scores, std::span<const Label> labels);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double true_positives = 0.0;
  double false_positives = 0.0;  // weighted by negative_weight
  double false_negatives = 0.0;
  bool no_predicted_positives = false;  // precision reported as 0
};

/// Confusion-matrix metrics for the rule score >= threshold. When negatives
/// were subsampled, `negative_weight` scales false positives back to the
/// full candidate set.
PrecisionRecall precision_recall(std::span<const double> scores, std::span<const Label> labels,
                                 double threshold, double negative_weight = 1.0);

/// Candidate cut with the largest F1; ties go to the first candidate.
double best_f1_threshold(std::span<const double> scores, std::span<const Label> labels,
                         std::span<const double> candidates, double negative_weight = 1.0);

/// The 101 cuts {0.00, 0.01, ..., 1.00}.
std::vector<double> unit_threshold_grid();

/// 101 empirical quantiles of `scores` (deduplicated), for unbounded scores.
std::vector<double> quantile_threshold_grid(std::span<const double> scores);

}  // namespace stacklp
