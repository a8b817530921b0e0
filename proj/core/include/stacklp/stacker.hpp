#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stacklp/feature_table.hpp"
#include "stacklp/forest.hpp"
#include "stacklp/holdout.hpp"

namespace stacklp {

/// Model-selection criterion on the validation folds.
enum class Objective : std::uint8_t { kF1, kAuc };

const char* objective_name(Objective objective);
Objective parse_objective(const std::string& name);

/// Trees 100, depth {4, 8, unlimited}, min leaf {1, 5}.
std::vector<ForestParams> default_grid();

struct StackOptions {
  FamilyMask families{Family::kTopological, Family::kModel};
  Objective objective = Objective::kF1;
  std::vector<ForestParams> grid = default_grid();
  int folds = 5;
  int workers = 1;
  /// Weight of each training negative in F1 (for subsampled negatives).
  double negative_weight = 1.0;
};

/// A trained level-1 model over the columns of the selected families.
struct StackedModel {
  Forest forest;
  FamilyMask families;
  Objective objective = Objective::kF1;
  double threshold = 0.5;       // F1-maximizing cut on pooled validation scores
  double validation_score = 0;  // objective value of the chosen grid point

  const std::vector<ColumnInfo>& columns() const { return forest.columns(); }
  /// The chosen grid point.
  const ForestParams& params() const { return forest.params(); }

  void write_json(std::ostream& out) const;
  static StackedModel read_json(std::istream& in);
};

/// Cross-validated grid search on the training rows (features computed on
/// the doubly reduced graph), then a refit on all rows with the winner.
/// Grid ties go to the earlier grid point.
StackedModel train_stack(const PairFeatureTable& training, std::span<const Label> labels,
                         const StackOptions& options, std::uint64_t seed);

/// Trains with fixed forest parameters on the given columns, skipping the
/// grid search; the threshold is the F1-optimal cut on training scores.
StackedModel train_fixed(const PairFeatureTable& training, std::span<const Label> labels,
                         std::span<const std::size_t> columns, const ForestParams& params,
                         std::uint64_t seed);

/// Forest scores in [0, 1]; columns are matched by id.
std::vector<double> predict_scores(const StackedModel& model, const PairFeatureTable& table,
                                   int workers = 1);

const std::vector<double>& gini_importances(const StackedModel& model);

/// Each column votes for its top ceil(q * N) rows (ties broken by row
/// order); the score is the number of votes.
std::vector<double> majority_vote(const PairFeatureTable& table, std::span<const std::size_t> columns,
                                  double positive_fraction);

/// A raw column used as a predictor on its own. Orientation is fixed on
/// the training rows: the column is negated when its training AUC is below
/// one half. The threshold maximizes training F1 over score quantiles.
struct WeakLearner {
  std::string id;
  bool flipped = false;
  double training_auc = 0.5;
  double threshold = 0.0;

  std::vector<double> scores(std::span<const double> column) const;
};

WeakLearner fit_weak_learner(const std::string& id, std::span<const double> training_column,
                             std::span<const Label> labels, double negative_weight = 1.0);

struct SaturationCurve {
  std::vector<std::size_t> ks;
  std::vector<double> auc;
  double full_auc = 0.0;  // the model's own holdout AUC
  std::size_t k_star = 0;
  /// Columns ranked by importance (ties by column order).
  std::vector<std::string> ranking;
};

/// Retrains the model's forest configuration (same seed) on its top-k
/// importance columns, kept in original column order, for each k, and
/// evaluates holdout AUC. k* is the least k reaching 95% of the full AUC,
/// or the full column count when none does.
SaturationCurve saturation_curve(const StackedModel& model, const PairFeatureTable& training,
                                 std::span<const Label> training_labels, const PairFeatureTable& test,
                                 std::span<const Label> test_labels, std::span<const std::size_t> ks,
                                 int workers = 1);

}  // namespace stacklp
