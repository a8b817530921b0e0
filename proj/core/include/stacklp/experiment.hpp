#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stacklp/analytics.hpp"
#include "stacklp/embedding.hpp"
#include "stacklp/feature_table.hpp"
#include "stacklp/graph.hpp"
#include "stacklp/holdout.hpp"
#include "stacklp/oracle.hpp"
#include "stacklp/stacker.hpp"
#include "stacklp/topo_features.hpp"

namespace stacklp {

/// Mean optimal-AUC gap published for the stack over all topological and
/// model predictors; printed next to the measured value by `summarize`.
inline constexpr double kPublishedStackGap = 0.049;

struct FeatureOptions {
  TopoOptions topo;
  EmbeddingParams embedding;
  int workers = 1;
};

/// Feature table of the requested families for `pairs`, scored on `graph`.
/// Column order: topological, model, embedding.
PairFeatureTable compute_features(const Graph& graph, std::span<const NodePair> pairs,
                                  const FamilyMask& families, const FeatureOptions& options,
                                  std::uint64_t seed);

struct NetworkInput {
  std::string name;
  std::string path;
  std::string domain;
};

struct SaturationConfig {
  FamilyMask stack{Family::kTopological, Family::kModel};
  std::size_t max_k = 15;
};

struct ExperimentConfig {
  std::vector<NetworkInput> inputs;
  /// Names from builtin_suite(); empty with use_synthetic = all 45.
  bool use_synthetic = false;
  std::vector<std::string> synthetic;
  double alpha = 0.8;
  double alpha_prime = 0.8;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds{1};
  /// Column ids scored on their own; "all" or a family name expands.
  std::vector<std::string> predictors;
  std::vector<FamilyMask> stacks{FamilyMask{Family::kTopological, Family::kModel}};
  Objective objective = Objective::kF1;
  std::string output_dir = "results";
  std::size_t negative_cap = 0;       // training negatives, 0 = all
  std::size_t test_negative_cap = 0;  // test negatives, 0 = all
  bool majority_vote = true;
  std::size_t oracle_samples = kDefaultOracleSamples;
  std::optional<SaturationConfig> saturation;
  EmbeddingParams embedding;
  int folds = 5;
  int workers = 1;

  /// Parses and validates a JSON document; unknown keys are rejected.
  /// Relative input paths are resolved against `base_dir` when given.
  static ExperimentConfig parse(const std::string& json_text, const std::string& base_dir = "");
  static ExperimentConfig load(const std::string& path);

  /// Canonical JSON (sorted keys, every field explicit).
  std::string to_json() const;
  /// FNV-1a 64 of to_json().
  std::uint64_t hash() const;
};

struct MethodResult {
  std::string method;
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.0;
};

/// Importance analytics of one trained stack.
struct StackReport {
  std::string stack;
  std::vector<std::string> columns;
  std::vector<double> importances;
  double entropy = 0.0;
  TopXFit top_x;
  double family_entropy = 0.0;
  double gini = 0.0;
  double validation_score = 0.0;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 0;
};

struct CellReport {
  std::string network;
  std::string domain;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  bool synthetic = false;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t holdout_edges = 0;
  std::size_t training_positives = 0;
  std::size_t training_negatives = 0;
  std::size_t test_negatives = 0;
  double negative_weight = 1.0;
  std::optional<AucEstimate> oracle;
  std::vector<MethodResult> methods;
  std::vector<StackReport> stacks;
  std::optional<SaturationCurve> saturation;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

struct ExperimentResult {
  std::vector<CellReport> cells;
  std::vector<std::string> columns;  // every predictor column id, in table order
};

/// Runs every (network, replicate) cell and writes results.csv,
/// networks.csv, cells/*.json, saturation.csv (when configured) and
/// manifest.json under output_dir. Output bytes do not depend on workers.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs one cell without writing files.
CellReport run_cell(const ExperimentConfig& config, const NetworkInput& input, std::uint64_t replicate);

/// results.csv text for a set of cells, rows sorted by (network, seed, method).
std::string results_csv(const std::vector<CellReport>& cells);

struct SummaryRow {
  std::string method;
  std::string group;  // "all", "size:<200", "size:200-1000", "size:>1000", "domain:<tag>"
  std::size_t count = 0;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  double precision_mean = 0.0;
  double recall_mean = 0.0;
  double f1_mean = 0.0;
  std::size_t gap_count = 0;
  double gap_mean = 0.0;
  double gap_std = 0.0;
};

/// Aggregates results.csv and networks.csv of each report directory. Means
/// with sample standard deviations per (method, group).
std::vector<SummaryRow> summarize(const std::vector<std::string>& report_dirs);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace stacklp
