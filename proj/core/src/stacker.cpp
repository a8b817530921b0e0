#include "stacklp/stacker.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "stacklp/error.hpp"
#include "stacklp/metrics.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

using Json = nlohmann::json;

constexpr double kSaturationFraction = 0.95;
constexpr int kStackFormatVersion = 1;

double objective_value(Objective objective, std::span<const double> scores, std::span<const Label> labels,
                       double negative_weight) {
  if (objective == Objective::kAuc) return auc(scores, labels);
  const auto grid = unit_threshold_grid();
  const double cut = best_f1_threshold(scores, labels, grid, negative_weight);
  return precision_recall(scores, labels, cut, negative_weight).f1;
}

}  // namespace

const char* objective_name(Objective objective) { return objective == Objective::kAuc ? "auc" : "f1"; }

Objective parse_objective(const std::string& name) {
  if (name == "f1" || name == "F1" || name == "f-measure") return Objective::kF1;
  if (name == "auc" || name == "AUC") return Objective::kAuc;
  fail(ErrorCategory::kConfig, "unknown objective '" + name + "' (expected f1 or auc)");
}

std::vector<ForestParams> default_grid() {
  std::vector<ForestParams> grid;
  for (std::size_t depth : {4, 8, 0}) {
    for (std::size_t leaf : {1, 5}) {
      ForestParams p;
      p.trees = 100;
      p.max_depth = depth;
      p.min_leaf = leaf;
      grid.push_back(p);
    }
  }
  return grid;
}

StackedModel train_stack(const PairFeatureTable& training, std::span<const Label> labels,
                         const StackOptions& options, std::uint64_t seed) {
  require(labels.size() == training.rows(), "labels do not match the training table");
  require(!options.grid.empty(), "hyperparameter grid is empty");
  require(options.folds >= 2, "cross-validation needs at least two folds");
  const auto cols = training.columns_in(options.families);
  if (cols.empty()) {
    fail(ErrorCategory::kInvalidArgument, "no feature columns for families " + options.families.to_string());
  }
  const PairFeatureTable sub = training.select_columns(cols);
  const auto folds = kfold(labels, options.folds, derive_seed(seed, 0x5f));

  const std::size_t n_folds = folds.size();
  std::vector<std::vector<double>> pooled(options.grid.size(), std::vector<double>(sub.rows(), 0.0));
  parallel_for(options.grid.size() * n_folds, options.workers, [&](std::size_t task) {
    const std::size_t g = task / n_folds, f = task % n_folds;
    ForestParams params = options.grid[g];
    params.workers = 1;
    const Forest forest = train_forest(sub, labels, folds[f].train, params, derive_seed(seed, 0x100 + task));
    const auto scores = forest.predict(sub, folds[f].validate);
    for (std::size_t i = 0; i < scores.size(); ++i) pooled[g][folds[f].validate[i]] = scores[i];
  });

  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t g = 0; g < options.grid.size(); ++g) {
    const double value = objective_value(options.objective, pooled[g], labels, options.negative_weight);
    if (value > best_value) {
      best_value = value;
      best = g;
    }
  }

  StackedModel model;
  model.families = options.families;
  model.objective = options.objective;
  model.validation_score = best_value;
  const auto grid = unit_threshold_grid();
  model.threshold = best_f1_threshold(pooled[best], labels, grid, options.negative_weight);
  ForestParams params = options.grid[best];
  params.workers = options.workers;
  model.forest = train_forest(sub, labels, params, derive_seed(seed, 0xf1));
  return model;
}

StackedModel train_fixed(const PairFeatureTable& training, std::span<const Label> labels,
                         std::span<const std::size_t> columns, const ForestParams& params,
                         std::uint64_t seed) {
  require(!columns.empty(), "no feature columns selected");
  const PairFeatureTable sub = training.select_columns(columns);
  StackedModel model;
  for (const auto& c : sub.columns()) model.families.insert(c.family);
  model.forest = train_forest(sub, labels, params, seed);
  const auto scores = model.forest.predict(sub, params.workers);
  const auto grid = unit_threshold_grid();
  model.threshold = best_f1_threshold(scores, labels, grid);
  model.validation_score = auc(scores, labels);
  model.objective = Objective::kAuc;
  return model;
}

std::vector<double> predict_scores(const StackedModel& model, const PairFeatureTable& table, int workers) {
  return model.forest.predict(table, workers);
}

const std::vector<double>& gini_importances(const StackedModel& model) { return model.forest.importances(); }

std::vector<double> majority_vote(const PairFeatureTable& table, std::span<const std::size_t> columns,
                                  double positive_fraction) {
  require(!columns.empty(), "majority vote needs at least one column");
  require(positive_fraction >= 0.0 && positive_fraction <= 1.0, "vote fraction must lie in [0, 1]");
  const std::size_t n = table.rows();
  const auto top = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(positive_fraction * static_cast<double>(n))));
  std::vector<double> votes(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t c : columns) {
    require(c < table.cols(), "vote column out of range");
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return table.at(a, c) > table.at(b, c); });
    for (std::size_t i = 0; i < top; ++i) votes[order[i]] += 1.0;
  }
  return votes;
}

std::vector<double> WeakLearner::scores(std::span<const double> column) const {
  std::vector<double> out(column.begin(), column.end());
  if (flipped) {
    for (double& x : out) x = -x;
  }
  return out;
}

WeakLearner fit_weak_learner(const std::string& id, std::span<const double> training_column,
                             std::span<const Label> labels, double negative_weight) {
  WeakLearner w;
  w.id = id;
  const double raw = auc(training_column, labels);
  w.flipped = raw < 0.5;
  w.training_auc = w.flipped ? 1.0 - raw : raw;
  const auto oriented = w.scores(training_column);
  const auto grid = quantile_threshold_grid(oriented);
  w.threshold = best_f1_threshold(oriented, labels, grid, negative_weight);
  return w;
}

SaturationCurve saturation_curve(const StackedModel& model, const PairFeatureTable& training,
                                 std::span<const Label> training_labels, const PairFeatureTable& test,
                                 std::span<const Label> test_labels, std::span<const std::size_t> ks,
                                 int workers) {
  const auto& cols = model.columns();
  const auto& imp = model.forest.importances();
  std::vector<std::size_t> rank(cols.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });

  std::vector<std::size_t> in_training(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto idx = training.find(cols[c].id);
    if (idx < 0) fail(ErrorCategory::kInvalidArgument, "training table lacks column '" + cols[c].id + "'");
    in_training[c] = static_cast<std::size_t>(idx);
  }

  SaturationCurve curve;
  for (std::size_t r : rank) curve.ranking.push_back(cols[r].id);
  curve.full_auc = auc(predict_scores(model, test, workers), test_labels);
  curve.ks.assign(ks.begin(), ks.end());
  curve.auc.assign(ks.size(), 0.0);
  parallel_for(ks.size(), workers, [&](std::size_t i) {
    const std::size_t k = ks[i];
    require(k >= 1 && k <= cols.size(), "saturation k out of range");
    std::vector<std::size_t> chosen(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    std::vector<std::size_t> selected;
    for (std::size_t c : chosen) selected.push_back(in_training[c]);
    ForestParams params = model.params();
    params.workers = 1;
    const PairFeatureTable sub = training.select_columns(selected);
    const Forest forest = train_forest(sub, training_labels, params, model.forest.seed());
    curve.auc[i] = auc(forest.predict(test), test_labels);
  });

  curve.k_star = cols.size();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (curve.auc[i] >= kSaturationFraction * curve.full_auc) curve.k_star = std::min(curve.k_star, ks[i]);
  }
  return curve;
}

void StackedModel::write_json(std::ostream& out) const {
  std::ostringstream forest_text;
  forest.write_json(forest_text);
  Json j;
  j["format"] = "stacklp-stack";
  j["version"] = kStackFormatVersion;
  j["families"] = families.to_string();
  j["objective"] = objective_name(objective);
  j["threshold"] = threshold;
  j["validation_score"] = validation_score;
  j["forest"] = Json::parse(forest_text.str());
  out << j.dump();
}

StackedModel StackedModel::read_json(std::istream& in) {
  Json j;
  try {
    in >> j;
    if (j.at("format") != "stacklp-stack") fail(ErrorCategory::kIo, "not a stacked-model document");
    if (j.at("version").get<int>() != kStackFormatVersion) fail(ErrorCategory::kIo, "unsupported model version");
    StackedModel model;
    model.families = FamilyMask::parse(j.at("families").get<std::string>());
    model.objective = parse_objective(j.at("objective").get<std::string>());
    model.threshold = j.at("threshold").get<double>();
    model.validation_score = j.at("validation_score").get<double>();
    std::istringstream forest_text(j.at("forest").dump());
    model.forest = Forest::read_json(forest_text);
    return model;
  } catch (const Json::exception& e) {
    fail(ErrorCategory::kIo, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace stacklp
