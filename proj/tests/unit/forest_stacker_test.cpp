#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "stacklp/error.hpp"
#include "stacklp/experiment.hpp"
#include "stacklp/forest.hpp"
#include "stacklp/metrics.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/stacker.hpp"
#include "stacklp/synth.hpp"

namespace stacklp {
namespace {

PairFeatureTable make_table(const std::vector<std::vector<double>>& columns, std::vector<ColumnInfo> info = {}) {
  const std::size_t rows = columns.front().size();
  std::vector<NodePair> pairs;
  for (std::size_t r = 0; r < rows; ++r) pairs.emplace_back(0, static_cast<NodeId>(r + 1));
  if (info.empty()) {
    for (std::size_t c = 0; c < columns.size(); ++c) info.push_back({"x" + std::to_string(c), Family::kTopological});
  }
  PairFeatureTable t(pairs, info);
  for (std::size_t c = 0; c < columns.size(); ++c) t.set_column(c, columns[c]);
  return t;
}

/// Labels follow x > 0; returns (signal, noise) columns and labels.
struct Toy {
  std::vector<double> signal, noise;
  std::vector<Label> labels;
};

Toy toy_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Toy t;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform() * 2 - 1;
    t.signal.push_back(x);
    t.noise.push_back(rng.uniform());
    t.labels.push_back(x > 0.3 ? Label::kPositive : Label::kNegative);
  }
  return t;
}

TEST(Forest, SeparableDataGivesPerfectTrainingAuc) {
  const auto toy = toy_data(300, 1);
  const auto table = make_table({toy.signal});
  ForestParams p;
  p.trees = 20;
  const Forest f = train_forest(table, toy.labels, p, 3);
  EXPECT_DOUBLE_EQ(auc(f.predict(table), toy.labels), 1.0);
}

TEST(Forest, ScoresInUnitInterval) {
  const auto toy = toy_data(200, 2);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams p;
  p.trees = 15;
  for (double s : train_forest(table, toy.labels, p, 1).predict(table)) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Forest, DepthOneIsBaggedStump) {
  const auto toy = toy_data(200, 3);
  const auto table = make_table({toy.signal});
  ForestParams p;
  p.trees = 10;
  p.max_depth = 1;
  const Forest f = train_forest(table, toy.labels, p, 4);
  for (const auto& tree : f.trees()) {
    EXPECT_LE(tree.depth(), 1u);
    EXPECT_LE(tree.leaves(), 2u);
    std::set<double> outputs;
    for (double x = -1; x <= 1; x += 0.01) outputs.insert(tree.predict(std::vector<double>{x}));
    EXPECT_LE(outputs.size(), 2u);
  }
}

TEST(Forest, ImportancesSumToOneAndFavourSignal) {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto toy = toy_data(300, seed);
    const auto table = make_table({toy.noise, toy.signal});
    ForestParams p;
    p.trees = 20;
    const Forest f = train_forest(table, toy.labels, p, seed);
    const auto& imp = f.importances();
    EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-12);
    if (imp[1] > imp[0]) ++wins;
  }
  EXPECT_EQ(wins, 10);
}

TEST(Forest, ConstantColumnHasZeroImportance) {
  const auto toy = toy_data(200, 5);
  const std::vector<double> constant(200, 4.0);
  const auto table = make_table({constant, toy.signal});
  ForestParams p;
  p.trees = 10;
  EXPECT_EQ(train_forest(table, toy.labels, p, 1).importances()[0], 0.0);
}

TEST(Forest, DuplicateColumnsShareCredit) {
  const auto toy = toy_data(400, 6);
  ForestParams p;
  p.trees = 60;
  p.max_features = 1;
  const auto single = train_forest(make_table({toy.signal, toy.noise}), toy.labels, p, 2).importances();
  const auto twin = train_forest(make_table({toy.signal, toy.signal, toy.noise}), toy.labels, p, 2).importances();
  EXPECT_NEAR(twin[0] + twin[1], single[0], 0.1);
  EXPECT_NEAR(std::accumulate(twin.begin(), twin.end(), 0.0), 1.0, 1e-12);
}

TEST(Forest, DeterministicAcrossWorkers) {
  const auto toy = toy_data(300, 7);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams a, b;
  a.trees = b.trees = 12;
  b.workers = 4;
  EXPECT_EQ(train_forest(table, toy.labels, a, 5).predict(table),
            train_forest(table, toy.labels, b, 5).predict(table, 3));
}

TEST(Forest, JsonRoundTrip) {
  const auto toy = toy_data(150, 8);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams p;
  p.trees = 5;
  const Forest f = train_forest(table, toy.labels, p, 1);
  std::stringstream text;
  f.write_json(text);
  const Forest back = Forest::read_json(text);
  EXPECT_EQ(back.predict(table), f.predict(table));
  EXPECT_EQ(back.importances(), f.importances());
  EXPECT_EQ(back.params(), f.params());
}

TEST(Forest, MatchesColumnsById) {
  const auto toy = toy_data(150, 9);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams p;
  p.trees = 5;
  const Forest f = train_forest(table, toy.labels, p, 1);
  const auto swapped = make_table({toy.noise, toy.signal}, {{"x1", Family::kTopological}, {"x0", Family::kTopological}});
  EXPECT_EQ(f.predict(swapped), f.predict(table));
}

TEST(Forest, RejectsDegenerateLabels) {
  const auto toy = toy_data(50, 10);
  const std::vector<Label> all_negative(50, Label::kNegative);
  EXPECT_THROW(train_forest(make_table({toy.signal}), all_negative, ForestParams{}, 1), Error);
}

TEST(Forest, IdenticalRowsScoreIdentically) {
  const auto toy = toy_data(200, 11);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams p;
  p.trees = 10;
  const Forest f = train_forest(table, toy.labels, p, 1);
  const auto probe = make_table({std::vector<double>(5, 0.4), std::vector<double>(5, 0.2)});
  const auto s = f.predict(probe);
  for (double x : s) EXPECT_EQ(x, s[0]);
}

TEST(Forest, RowPermutationPermutesScores) {
  const auto toy = toy_data(200, 12);
  const auto table = make_table({toy.signal, toy.noise});
  ForestParams p;
  p.trees = 10;
  const Forest f = train_forest(table, toy.labels, p, 1);
  const auto scores = f.predict(table);
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  const auto permuted = f.predict(table.select_rows(order));
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(permuted[i], scores[order[i]]);
}

struct SyntheticInstance {
  PairFeatureTable train, test;
  std::vector<Label> train_labels, test_labels;
};

SyntheticInstance instance_for(const std::string& row, std::uint64_t seed) {
  SyntheticSpec spec;
  for (const auto& s : builtin_suite()) {
    if (s.name == row) spec = s;
  }
  const auto planted = generate(spec, seed);
  const auto split = sample_holdout(planted.graph, 0.8, derive_seed(seed, 2));
  const auto training = build_training_instance(split, 0.8, derive_seed(seed, 3), 3000);
  const auto candidates = build_candidates(split, derive_seed(seed, 4), 5000);
  const FamilyMask families{Family::kTopological, Family::kModel};
  SyntheticInstance out;
  out.train = compute_features(training.feature_graph, training.pairs, families, {}, derive_seed(seed, 5));
  out.test = compute_features(split.observed, candidates.pairs, families, {}, derive_seed(seed, 6));
  out.train_labels = training.labels;
  out.test_labels = candidates.labels;
  return out;
}

StackOptions quick_options(FamilyMask families) {
  StackOptions o;
  o.families = families;
  o.grid.clear();
  for (std::size_t depth : {4, 0}) {
    ForestParams p;
    p.trees = 30;
    p.max_depth = depth;
    o.grid.push_back(p);
  }
  o.folds = 3;
  return o;
}

TEST(Stacker, FamilyMaskSelectsColumns) {
  const auto inst = instance_for("low-poisson-k4", 1);
  const auto topo = train_stack(inst.train, inst.train_labels, quick_options({Family::kTopological}), 1);
  EXPECT_EQ(topo.columns().size(), 42u);
  const auto both =
      train_stack(inst.train, inst.train_labels, quick_options({Family::kTopological, Family::kModel}), 1);
  EXPECT_EQ(both.columns().size(), 46u);
  const auto& imp = gini_importances(both);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-12);
}

TEST(Stacker, PlantedFourBlocksNearOracle) {
  const auto inst = instance_for("low-poisson-k4", 2);
  const auto model =
      train_stack(inst.train, inst.train_labels, quick_options({Family::kTopological, Family::kModel}), 2);
  EXPECT_NEAR(auc(predict_scores(model, inst.test), inst.test_labels), 0.875, 0.10);
}

TEST(Stacker, JsonRoundTrip) {
  const auto inst = instance_for("low-poisson-k2", 3);
  const auto model = train_stack(inst.train, inst.train_labels, quick_options({Family::kModel}), 3);
  std::stringstream text;
  model.write_json(text);
  const auto back = StackedModel::read_json(text);
  EXPECT_EQ(predict_scores(back, inst.test), predict_scores(model, inst.test));
  EXPECT_EQ(back.threshold, model.threshold);
  EXPECT_EQ(back.families, model.families);
}

TEST(Stacker, SaturationAtFullCountMatchesModel) {
  const auto inst = instance_for("low-weibull-k4", 4);
  const auto model =
      train_stack(inst.train, inst.train_labels, quick_options({Family::kTopological, Family::kModel}), 4);
  const std::vector<std::size_t> ks{1, 5, model.columns().size()};
  const auto curve = saturation_curve(model, inst.train, inst.train_labels, inst.test, inst.test_labels, ks);
  EXPECT_DOUBLE_EQ(curve.auc.back(), curve.full_auc);
  EXPECT_LE(curve.k_star, model.columns().size());
  EXPECT_EQ(curve.ranking.size(), model.columns().size());
}

TEST(Stacker, ObjectiveNames) {
  EXPECT_EQ(parse_objective("auc"), Objective::kAuc);
  EXPECT_EQ(parse_objective("f1"), Objective::kF1);
  EXPECT_THROW(parse_objective("accuracy"), Error);
}

TEST(MajorityVote, SingleColumnKeepsRanking) {
  const auto table = make_table({{0.1, 0.9, 0.5, 0.7}});
  const std::vector<std::size_t> cols{0};
  const auto votes = majority_vote(table, cols, 0.5);
  const std::vector<double> expected{0, 1, 0, 1};
  EXPECT_EQ(votes, expected);
}

TEST(MajorityVote, TiesBrokenByRowOrder) {
  const auto table = make_table({{1, 1, 1, 1}});
  const std::vector<std::size_t> cols{0};
  const std::vector<double> expected{1, 1, 0, 0};
  EXPECT_EQ(majority_vote(table, cols, 0.5), expected);
}

TEST(MajorityVote, IdenticalColumnsAllOrNothing) {
  const std::vector<double> col{0.3, 0.8, 0.1, 0.6, 0.2};
  const auto table = make_table({col, col, col});
  const std::vector<std::size_t> cols{0, 1, 2};
  for (double v : majority_vote(table, cols, 0.4)) EXPECT_TRUE(v == 0.0 || v == 3.0);
}

TEST(WeakLearner, FlipsInvertedColumns) {
  const std::vector<double> col{5, 4, 3, 2, 1};
  const std::vector<Label> labels{Label::kPositive, Label::kPositive, Label::kNegative, Label::kNegative,
                                  Label::kNegative};
  const auto inverted = fit_weak_learner("x", std::vector<double>{1, 2, 3, 4, 5}, labels);
  EXPECT_TRUE(inverted.flipped);
  EXPECT_DOUBLE_EQ(inverted.training_auc, 1.0);
  const auto upright = fit_weak_learner("x", col, labels);
  EXPECT_FALSE(upright.flipped);
  const auto s = upright.scores(col);
  const auto pr = precision_recall(s, labels, upright.threshold);
  EXPECT_DOUBLE_EQ(pr.f1, 1.0);
}

}  // namespace
}  // namespace stacklp
