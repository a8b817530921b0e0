#include "stacklp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>

#include "json.hpp"
#include "stacklp/error.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

using Json = nlohmann::json;

constexpr double kMinGain = 1e-12;

/// Per-feature cut points and the bin code of every training row.
struct BinnedData {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<std::vector<double>> thresholds;  // ascending, within the feature's range
  std::vector<std::uint8_t> codes;              // feature-major: codes[f * rows + i]

  std::uint8_t code(std::size_t f, std::size_t i) const { return codes[f * rows + i]; }
};

std::vector<double> cut_points(std::vector<double> values, std::size_t max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> unique = values;
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> cuts;
  if (unique.size() <= max_bins) {
    for (std::size_t i = 1; i < unique.size(); ++i) cuts.push_back(unique[i - 1] + (unique[i] - unique[i - 1]) / 2);
    return cuts;
  }
  // Quantile boundaries: each cut separates a sorted value from its predecessor.
  std::size_t last = 0;
  for (std::size_t b = 1; b < max_bins; ++b) {
    const double at = values[b * values.size() / max_bins];
    const auto idx = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), at) - unique.begin());
    if (idx == 0 || idx <= last) continue;
    cuts.push_back(unique[idx - 1] + (unique[idx] - unique[idx - 1]) / 2);
    last = idx;
  }
  return cuts;
}

BinnedData bin_features(const PairFeatureTable& table, std::span<const std::size_t> rows,
                        std::size_t max_bins, int workers) {
  BinnedData data;
  data.rows = rows.size();
  data.features = table.cols();
  data.thresholds.resize(data.features);
  data.codes.resize(data.features * data.rows);
  parallel_for(data.features, workers, [&](std::size_t f) {
    std::vector<double> values(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) values[i] = table.at(rows[i], f);
    auto& cuts = data.thresholds[f];
    cuts = cut_points(values, max_bins);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      data.codes[f * data.rows + i] =
          static_cast<std::uint8_t>(std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
    }
  });
  return data;
}

struct ClassMass {
  double pos = 0.0;
  double neg = 0.0;
  std::size_t count = 0;

  double weight() const { return pos + neg; }
  /// W * (1 - Gini) = (pos^2 + neg^2) / W; larger is purer.
  double purity() const {
    const double w = weight();
    return w > 0.0 ? (pos * pos + neg * neg) / w : 0.0;
  }
  void add(bool positive, double w) {
    (positive ? pos : neg) += w;
    ++count;
  }
};

struct Split {
  std::size_t feature = 0;
  std::size_t code = 0;  // rows with code <= this go left
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedData& data, const std::vector<bool>& positive, const ForestParams& params,
              double pos_weight, double neg_weight, std::size_t mtry)
      : data_(data),
        positive_(positive),
        params_(params),
        pos_weight_(pos_weight),
        neg_weight_(neg_weight),
        mtry_(mtry) {}

  Tree build(Rng& rng, std::vector<double>& importance) {
    const std::size_t r = data_.rows;
    std::vector<std::uint32_t> sample(r);
    if (params_.bootstrap) {
      for (auto& s : sample) s = static_cast<std::uint32_t>(rng.below(r));
    } else {
      std::iota(sample.begin(), sample.end(), 0u);
    }
    std::vector<std::size_t> order(data_.features);
    std::iota(order.begin(), order.end(), 0);

    Tree tree;
    struct Task {
      std::uint32_t node;
      std::size_t begin, end, depth;
    };
    std::vector<Task> stack{{0, 0, r, 0}};
    tree.nodes.emplace_back();
    double root_weight = 0.0;
    std::vector<double> raw(data_.features, 0.0);
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::span<std::uint32_t> rows(sample.data() + task.begin, task.end - task.begin);
      ClassMass mass;
      for (auto i : rows) mass.add(positive_[i], weight_of(i));
      if (task.node == 0) root_weight = mass.weight();
      tree.nodes[task.node].value = mass.weight() > 0.0 ? mass.pos / mass.weight() : 0.0;

      const bool at_depth = params_.max_depth != 0 && task.depth >= params_.max_depth;
      if (mass.pos == 0.0 || mass.neg == 0.0 || at_depth || rows.size() < 2 * params_.min_leaf) continue;

      rng.shuffle(order);
      const auto split = best_split(rows, mass, order);
      if (!split) continue;

      const auto mid = std::partition(rows.begin(), rows.end(), [&](std::uint32_t i) {
        return data_.code(split->feature, i) <= split->code;
      });
      const std::size_t left_size = static_cast<std::size_t>(mid - rows.begin());
      auto& node = tree.nodes[task.node];
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = data_.thresholds[split->feature][split->code];
      node.left = static_cast<std::uint32_t>(tree.nodes.size());
      node.right = node.left + 1;
      raw[split->feature] += split->gain;
      const std::uint32_t left = node.left, right = node.right;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({right, task.begin + left_size, task.end, task.depth + 1});
      stack.push_back({left, task.begin, task.begin + left_size, task.depth + 1});
    }
    if (root_weight > 0.0) {
      for (std::size_t f = 0; f < raw.size(); ++f) importance[f] = raw[f] / root_weight;
    }
    return tree;
  }

 private:
  double weight_of(std::uint32_t i) const { return positive_[i] ? pos_weight_ : neg_weight_; }

  std::optional<Split> best_split(std::span<const std::uint32_t> rows, const ClassMass& total,
                                  std::span<const std::size_t> order) {
    std::optional<Split> best;
    double best_gain = kMinGain * total.weight();
    std::size_t evaluated = 0;
    for (std::size_t f : order) {
      if (evaluated == mtry_) break;
      const std::size_t bins = data_.thresholds[f].size() + 1;
      if (bins < 2) continue;
      if (rows.size() * 4 < bins) {
        if (scan_sorted(rows, total, f, best, best_gain)) ++evaluated;
      } else {
        if (scan_histogram(rows, total, f, bins, best, best_gain)) ++evaluated;
      }
    }
    return best;
  }

  void consider(const ClassMass& left, const ClassMass& total, std::size_t f, std::size_t code,
                std::optional<Split>& best, double& best_gain) const {
    const std::size_t right_count = total.count - left.count;
    if (left.count < params_.min_leaf || right_count < params_.min_leaf) return;
    ClassMass right{total.pos - left.pos, total.neg - left.neg, right_count};
    const double gain = left.purity() + right.purity() - total.purity();
    if (gain > best_gain) {
      best_gain = gain;
      best = Split{f, code, gain};
    }
  }

  // Returns false when the feature is constant within the node.
  bool scan_histogram(std::span<const std::uint32_t> rows, const ClassMass& total, std::size_t f,
                      std::size_t bins, std::optional<Split>& best, double& best_gain) {
    hist_.assign(bins, ClassMass{});
    for (auto i : rows) hist_[data_.code(f, i)].add(positive_[i], weight_of(i));
    std::size_t occupied = 0;
    for (const auto& h : hist_) occupied += h.count > 0 ? 1 : 0;
    if (occupied < 2) return false;
    ClassMass left;
    for (std::size_t b = 0; b + 1 < bins; ++b) {
      if (hist_[b].count == 0) continue;
      left.pos += hist_[b].pos;
      left.neg += hist_[b].neg;
      left.count += hist_[b].count;
      if (left.count == total.count) break;
      consider(left, total, f, b, best, best_gain);
    }
    return true;
  }

  bool scan_sorted(std::span<const std::uint32_t> rows, const ClassMass& total, std::size_t f,
                   std::optional<Split>& best, double& best_gain) {
    keyed_.clear();
    for (auto i : rows) keyed_.emplace_back(data_.code(f, i), i);
    std::sort(keyed_.begin(), keyed_.end());
    if (keyed_.front().first == keyed_.back().first) return false;
    ClassMass left;
    for (std::size_t k = 0; k + 1 < keyed_.size(); ++k) {
      left.add(positive_[keyed_[k].second], weight_of(keyed_[k].second));
      if (keyed_[k].first == keyed_[k + 1].first) continue;
      consider(left, total, f, keyed_[k].first, best, best_gain);
    }
    return true;
  }

  const BinnedData& data_;
  const std::vector<bool>& positive_;
  const ForestParams& params_;
  double pos_weight_;
  double neg_weight_;
  std::size_t mtry_;
  std::vector<ClassMass> hist_;
  std::vector<std::pair<std::uint8_t, std::uint32_t>> keyed_;
};

Json params_to_json(const ForestParams& p) {
  return Json{{"trees", p.trees},         {"max_depth", p.max_depth},
              {"min_leaf", p.min_leaf},   {"max_features", p.max_features},
              {"bootstrap", p.bootstrap}, {"class_weighted", p.class_weighted},
              {"max_bins", p.max_bins}};
}

ForestParams params_from_json(const Json& j) {
  ForestParams p;
  p.trees = j.at("trees").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.min_leaf = j.at("min_leaf").get<std::size_t>();
  p.max_features = j.at("max_features").get<std::size_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.class_weighted = j.at("class_weighted").get<bool>();
  p.max_bins = j.at("max_bins").get<std::size_t>();
  return p;
}

}  // namespace

double Tree::predict(std::span<const double> row) const {
  std::uint32_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[at].value;
}

std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) level[nodes[i].left] = level[nodes[i].right] = level[i] + 1;
  }
  return deepest;
}

std::size_t Tree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

std::vector<std::size_t> Forest::column_map(const PairFeatureTable& table) const {
  std::vector<std::size_t> map(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto idx = table.find(columns_[c].id);
    if (idx < 0) fail(ErrorCategory::kInvalidArgument, "feature table lacks column '" + columns_[c].id + "'");
    map[c] = static_cast<std::size_t>(idx);
  }
  return map;
}

double Forest::predict_row(std::span<const double> row) const {
  require(row.size() == columns_.size(), "row width does not match the forest");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(row);
  return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
}

std::vector<double> Forest::predict(const PairFeatureTable& table, int workers) const {
  std::vector<std::size_t> rows(table.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return predict(table, rows, workers);
}

std::vector<double> Forest::predict(const PairFeatureTable& table, std::span<const std::size_t> rows,
                                    int workers) const {
  const auto map = column_map(table);
  std::vector<double> out(rows.size());
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (rows.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    std::vector<double> row(map.size());
    const std::size_t end = std::min(rows.size(), (b + 1) * kBlock);
    for (std::size_t r = b * kBlock; r < end; ++r) {
      for (std::size_t c = 0; c < map.size(); ++c) row[c] = table.at(rows[r], map[c]);
      out[r] = predict_row(row);
    }
  });
  return out;
}

Forest train_forest(const PairFeatureTable& features, std::span<const Label> labels,
                    std::span<const std::size_t> rows, const ForestParams& params, std::uint64_t seed) {
  require(labels.size() == features.rows(), "labels do not match the feature table");
  require(features.cols() > 0, "forest needs at least one feature column");
  require(params.trees >= 1 && params.min_leaf >= 1, "forest needs trees >= 1 and min_leaf >= 1");
  require(params.max_bins >= 2 && params.max_bins <= 256, "max_bins must lie in [2, 256]");
  std::vector<bool> positive(rows.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < features.rows(), "training row out of range");
    positive[i] = labels[rows[i]] == Label::kPositive;
    pos += positive[i] ? 1 : 0;
    for (double x : features.row(rows[i])) {
      if (!std::isfinite(x)) fail(ErrorCategory::kData, "non-finite feature value");
    }
  }
  const std::size_t neg = rows.size() - pos;
  if (pos < 2 || neg < 2) fail(ErrorCategory::kData, "degenerate labels");

  const auto total = static_cast<double>(rows.size());
  const double pos_weight = params.class_weighted ? total / (2.0 * static_cast<double>(pos)) : 1.0;
  const double neg_weight = params.class_weighted ? total / (2.0 * static_cast<double>(neg)) : 1.0;
  const std::size_t f = features.cols();
  const std::size_t mtry = std::clamp<std::size_t>(
      params.max_features ? params.max_features
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f)))),
      1, f);

  const BinnedData data = bin_features(features, rows, params.max_bins, params.workers);

  Forest forest;
  forest.params_ = params;
  forest.seed_ = seed;
  forest.columns_ = features.columns();
  forest.trees_.resize(params.trees);
  std::vector<std::vector<double>> per_tree(params.trees, std::vector<double>(f, 0.0));
  parallel_for(params.trees, params.workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    TreeBuilder builder(data, positive, params, pos_weight, neg_weight, mtry);
    forest.trees_[t] = builder.build(rng, per_tree[t]);
  });

  forest.importances_.assign(f, 0.0);
  for (const auto& imp : per_tree) {
    for (std::size_t c = 0; c < f; ++c) forest.importances_[c] += imp[c];
  }
  const double sum = std::accumulate(forest.importances_.begin(), forest.importances_.end(), 0.0);
  for (double& x : forest.importances_) x = sum > 0.0 ? x / sum : 1.0 / static_cast<double>(f);
  return forest;
}

Forest train_forest(const PairFeatureTable& features, std::span<const Label> labels,
                    const ForestParams& params, std::uint64_t seed) {
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return train_forest(features, labels, rows, params, seed);
}

void Forest::write_json(std::ostream& out) const {
  Json j;
  j["format"] = "stacklp-forest";
  j["version"] = kFormatVersion;
  j["params"] = params_to_json(params_);
  j["seed"] = seed_;
  Json cols = Json::array();
  for (const auto& c : columns_) cols.push_back({{"id", c.id}, {"family", family_name(c.family)}});
  j["columns"] = std::move(cols);
  j["importances"] = importances_;
  Json trees = Json::array();
  for (const auto& t : trees_) {
    Json feature = Json::array(), threshold = Json::array(), left = Json::array(), right = Json::array(),
         value = Json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
  }
  j["trees"] = std::move(trees);
  out << j.dump();
}

Forest Forest::read_json(std::istream& in) {
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    fail(ErrorCategory::kIo, std::string("malformed forest JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "stacklp-forest") fail(ErrorCategory::kIo, "not a forest document");
    if (j.at("version").get<int>() != kFormatVersion) fail(ErrorCategory::kIo, "unsupported forest version");
    Forest forest;
    forest.params_ = params_from_json(j.at("params"));
    forest.seed_ = j.at("seed").get<std::uint64_t>();
    for (const auto& c : j.at("columns")) {
      forest.columns_.push_back({c.at("id").get<std::string>(), parse_family(c.at("family").get<std::string>())});
    }
    forest.importances_ = j.at("importances").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<std::uint32_t>>();
      const auto right = t.at("right").get<std::vector<std::uint32_t>>();
      const auto value = t.at("value").get<std::vector<double>>();
      const std::size_t size = feature.size();
      if (threshold.size() != size || left.size() != size || right.size() != size || value.size() != size) {
        fail(ErrorCategory::kIo, "forest tree arrays differ in length");
      }
      Tree tree;
      tree.nodes.resize(size);
      for (std::size_t i = 0; i < size; ++i) {
        tree.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        const bool internal = feature[i] >= 0;
        if (internal && (static_cast<std::size_t>(feature[i]) >= forest.columns_.size() || left[i] >= size ||
                         right[i] >= size || left[i] <= i || right[i] <= i)) {
          fail(ErrorCategory::kIo, "forest tree references an invalid node or feature");
        }
      }
      forest.trees_.push_back(std::move(tree));
    }
    return forest;
  } catch (const Json::exception& e) {
    fail(ErrorCategory::kIo, std::string("malformed forest JSON: ") + e.what());
  }
}

}  // namespace stacklp
