#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stacklp/analytics.hpp"
#include "stacklp/error.hpp"
#include "stacklp/experiment.hpp"
#include "stacklp/metrics.hpp"
#include "stacklp/oracle.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/stacker.hpp"
#include "stacklp/synth.hpp"
#include "stacklp/version.hpp"

namespace {

using namespace stacklp;
using Json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidArgument:
    case ErrorCategory::kConfig:
      return kExitUsage;
    case ErrorCategory::kIo:
      return kExitIo;
    case ErrorCategory::kData:
      return kExitData;
    case ErrorCategory::kInternal:
      break;
  }
  return kExitOther;
}

const char* category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidArgument:
      return "invalid argument";
    case ErrorCategory::kConfig:
      return "config error";
    case ErrorCategory::kIo:
      return "io error";
    case ErrorCategory::kData:
      return "data error";
    case ErrorCategory::kInternal:
      break;
  }
  return "internal error";
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::kIo, "cannot read " + path.string());
  return in;
}

Json read_json_file(const fs::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCategory::kIo, path.string() + ": " + e.what());
  }
}

const SyntheticSpec& find_spec(const std::string& name) {
  static const auto suite = builtin_suite();
  for (const auto& s : suite) {
    if (s.name == name) return s;
  }
  fail(ErrorCategory::kInvalidArgument, "unknown synthetic spec '" + name + "' (see `generate --list`)");
}

std::string label_string(const std::vector<Label>& labels) {
  std::string s(labels.size(), '0');
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kPositive) s[i] = '1';
  }
  return s;
}

std::vector<Label> parse_labels(const std::string& s) {
  std::vector<Label> labels(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') fail(ErrorCategory::kIo, "malformed label string");
    labels[i] = s[i] == '1' ? Label::kPositive : Label::kNegative;
  }
  return labels;
}

/// Training and test tables written by `features`.
struct FeatureDir {
  PairFeatureTable train;
  PairFeatureTable test;
  std::vector<Label> train_labels;
  std::vector<Label> test_labels;
  double negative_weight = 1.0;
  std::uint64_t seed = 0;

  static FeatureDir load(const fs::path& dir) {
    FeatureDir f;
    const Json meta = read_json_file(dir / "instance.json");
    try {
      f.train_labels = parse_labels(meta.at("train_labels").get<std::string>());
      f.test_labels = parse_labels(meta.at("test_labels").get<std::string>());
      f.negative_weight = meta.at("negative_weight").get<double>();
      f.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const Json::exception& e) {
      fail(ErrorCategory::kIo, (dir / "instance.json").string() + ": " + e.what());
    }
    auto train_in = open_in(dir / "train.bin");
    f.train = PairFeatureTable::read_binary(train_in);
    auto test_in = open_in(dir / "test.bin");
    f.test = PairFeatureTable::read_binary(test_in);
    if (f.train.rows() != f.train_labels.size() || f.test.rows() != f.test_labels.size()) {
      fail(ErrorCategory::kIo, dir.string() + ": labels do not match feature tables");
    }
    return f;
  }
};

StackedModel load_model(const fs::path& path) {
  auto in = open_in(path);
  return StackedModel::read_json(in);
}

void print_json(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    open_out(out) << j.dump(2) << "\n";
  }
}

// generate

struct GenerateArgs {
  std::string spec;
  std::uint64_t seed = 0;
  std::string out;
  std::string partition_out;
  bool list = false;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  auto* cmd = app.add_subcommand("generate", "Generate a network from the built-in synthetic suite");
  cmd->add_flag("--list", a.list, "List the suite's spec names and exit");
  cmd->add_option("--spec", a.spec, "Spec name");
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--out", a.out, "Edge-list output (stdout when omitted)");
  cmd->add_option("--partition", a.partition_out, "Planted partition CSV output");
  cmd->callback([&a, cmd] {
    if (a.list) {
      for (const auto& s : builtin_suite()) {
        std::cout << s.name << "\t" << degree_family_name(s.degree_family) << "\tk=" << s.k << "\tn=" << s.n
                  << "\t" << s.region << "\n";
      }
      return;
    }
    if (a.spec.empty()) throw CLI::RequiredError("--spec");
    if (cmd->count("--seed") == 0) throw CLI::RequiredError("--seed");
    const auto planted = generate(find_spec(a.spec), a.seed);
    for (const auto& w : planted.warnings) std::cerr << "warning: " << w << "\n";
    if (a.out.empty()) {
      write_edge_list(std::cout, planted.graph);
    } else {
      write_edge_list_file(a.out, planted.graph);
    }
    if (!a.partition_out.empty()) {
      auto out = open_out(a.partition_out);
      planted.partition.write_csv(out, &planted.graph);
    }
  });
}

// features

struct FeaturesArgs {
  std::string graph;
  std::string spec;
  std::uint64_t seed = 0;
  double alpha = 0.8;
  double alpha_prime = 0.8;
  std::string families = "T+M";
  std::size_t negative_cap = 0;
  std::size_t test_negative_cap = 0;
  int dims = EmbeddingParams{}.dims;
  int workers = 1;
  std::string out;
  bool csv = false;
};

void add_features(CLI::App& app, FeaturesArgs& a) {
  auto* cmd = app.add_subcommand("features", "Hold out edges and compute training and test feature tables");
  auto* source = cmd->add_option_group("source");
  source->add_option("--graph", a.graph, "Edge-list file");
  source->add_option("--spec", a.spec, "Synthetic spec name (generated with the same seed)");
  source->require_option(1);
  cmd->add_option("--seed", a.seed, "Master seed")->required();
  cmd->add_option("--alpha", a.alpha, "Fraction of edges observed")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--alpha-prime", a.alpha_prime, "Fraction of observed edges kept for training features")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--families", a.families, "Predictor families, e.g. T+M or T+M+E");
  cmd->add_option("--negative-cap", a.negative_cap, "Training negatives (0 = all)");
  cmd->add_option("--test-negative-cap", a.test_negative_cap, "Test negatives (0 = all)");
  cmd->add_option("--dims", a.dims, "Embedding dimensions");
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_flag("--csv", a.csv, "Also write train.csv and test.csv");
  cmd->callback([&a] {
    Graph graph;
    if (!a.spec.empty()) {
      graph = generate(find_spec(a.spec), a.seed).graph;
    } else {
      graph = read_edge_list_file(a.graph);
    }
    const auto split = sample_holdout(graph, a.alpha, derive_seed(a.seed, 2));
    if (split.holdout_edges.empty()) fail(ErrorCategory::kData, "no held-out edges; raise the edge count or lower alpha");
    const auto training = build_training_instance(split, a.alpha_prime, derive_seed(a.seed, 3), a.negative_cap);
    const auto candidates = build_candidates(split, derive_seed(a.seed, 4), a.test_negative_cap);
    FeatureOptions options;
    options.embedding.dims = a.dims;
    options.workers = a.workers;
    const auto families = FamilyMask::parse(a.families);
    const auto train = compute_features(training.feature_graph, training.pairs, families, options, derive_seed(a.seed, 5));
    const auto test = compute_features(split.observed, candidates.pairs, families, options, derive_seed(a.seed, 6));

    const fs::path dir(a.out);
    fs::create_directories(dir);
    {
      auto out = open_out(dir / "train.bin");
      train.write_binary(out);
    }
    {
      auto out = open_out(dir / "test.bin");
      test.write_binary(out);
    }
    if (a.csv) {
      auto train_csv = open_out(dir / "train.csv");
      train.write_csv(train_csv, &training.feature_graph);
      auto test_csv = open_out(dir / "test.csv");
      test.write_csv(test_csv, &split.observed);
    }
    Json columns = Json::array();
    for (const auto& c : train.columns()) columns.push_back(c.id);
    Json meta{{"seed", a.seed},
              {"alpha", a.alpha},
              {"alpha_prime", a.alpha_prime},
              {"families", families.to_string()},
              {"nodes", graph.node_count()},
              {"edges", graph.edge_count()},
              {"holdout_edges", split.holdout_edges.size()},
              {"negative_weight", candidates.negative_weight},
              {"columns", columns},
              {"train_labels", label_string(training.labels)},
              {"test_labels", label_string(candidates.labels)}};
    open_out(dir / "instance.json") << meta.dump() << "\n";
    std::cerr << "train " << train.rows() << " x " << train.cols() << ", test " << test.rows() << " x "
              << test.cols() << "\n";
  });
}

// stack

struct StackArgs {
  std::string features;
  std::string stack = "T+M";
  std::string objective = "f1";
  int folds = 5;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

void add_stack(CLI::App& app, StackArgs& a) {
  auto* cmd = app.add_subcommand("stack", "Train a stacked random forest on a features directory");
  cmd->add_option("--features", a.features, "Directory written by `features`")->required();
  cmd->add_option("--stack", a.stack, "Families to stack, e.g. T+M");
  cmd->add_option("--objective", a.objective, "Model-selection objective: f1 or auc");
  cmd->add_option("--folds", a.folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  cmd->add_option("--seed", a.seed, "Master seed")->required();
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "Model JSON output")->required();
  cmd->callback([&a] {
    const auto f = FeatureDir::load(a.features);
    StackOptions options;
    options.families = FamilyMask::parse(a.stack);
    options.objective = parse_objective(a.objective);
    options.folds = a.folds;
    options.workers = a.workers;
    const auto model = train_stack(f.train, f.train_labels, options, a.seed);
    auto out = open_out(a.out);
    model.write_json(out);
    std::cerr << "validation " << objective_name(model.objective) << " " << model.validation_score << ", depth "
              << model.params().max_depth << ", min leaf " << model.params().min_leaf << "\n";
  });
}

// evaluate

struct EvaluateArgs {
  std::string features;
  std::string model;
  std::string out;
  std::string lorenz_out;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* cmd = app.add_subcommand("evaluate", "Score the test table with a trained stack");
  cmd->add_option("--features", a.features, "Directory written by `features`")->required();
  cmd->add_option("--model", a.model, "Model JSON written by `stack`")->required();
  cmd->add_option("--out", a.out, "Report JSON output (stdout when omitted)");
  cmd->add_option("--lorenz", a.lorenz_out, "Lorenz curve CSV output");
  cmd->callback([&a] {
    const auto f = FeatureDir::load(a.features);
    const auto model = load_model(a.model);
    const auto scores = predict_scores(model, f.test);
    const auto pr = precision_recall(scores, f.test_labels, model.threshold, f.negative_weight);
    const auto& imp = gini_importances(model);
    const auto lorenz = lorenz_gini(imp);
    const auto top = fit_top_x(imp);

    Json predictors = Json::object();
    for (std::size_t c = 0; c < f.train.cols(); ++c) {
      const auto& id = f.train.columns()[c].id;
      const auto idx = f.test.find(id);
      if (idx < 0) continue;
      const auto learner = fit_weak_learner(id, f.train.column(c), f.train_labels);
      predictors[id] = auc(learner.scores(f.test.column(static_cast<std::size_t>(idx))), f.test_labels);
    }
    Json importances = Json::object();
    for (std::size_t c = 0; c < model.columns().size(); ++c) importances[model.columns()[c].id] = imp[c];
    Json lorenz_points = Json::array();
    for (const auto& [x, y] : lorenz.points) lorenz_points.push_back({x, y});

    Json report{{"stack", model.families.to_string()},
                {"auc", auc(scores, f.test_labels)},
                {"precision", pr.precision},
                {"recall", pr.recall},
                {"f1", pr.f1},
                {"threshold", model.threshold},
                {"no_predicted_positives", pr.no_predicted_positives},
                {"predictor_auc", predictors},
                {"importances", importances},
                {"entropy_bits", importance_entropy(imp)},
                {"top_x_percent", top.percent},
                {"top_x_count", top.count},
                {"family_entropy_bits", family_entropy(imp, model.columns())},
                {"lorenz", lorenz_points},
                {"gini", lorenz.gini}};
    print_json(report, a.out);
    if (!a.lorenz_out.empty()) {
      auto out = open_out(a.lorenz_out);
      out << "cum_features,cum_importance\n";
      for (const auto& [x, y] : lorenz.points) out << x << "," << y << "\n";
    }
  });
}

// oracle

struct OracleArgs {
  std::string spec;
  std::uint64_t seed = 0;
  std::size_t samples = kDefaultOracleSamples;
  double alpha = 0.8;
  int workers = 1;
  bool exact = false;
  std::string out;
};

void add_oracle(CLI::App& app, OracleArgs& a) {
  auto* cmd = app.add_subcommand("oracle", "Optimal AUC of a synthetic spec");
  cmd->add_option("--spec", a.spec, "Spec name")->required();
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--samples", a.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", a.alpha, "Fraction of edges observed")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--exact", a.exact, "Closed form instead of Monte Carlo");
  cmd->add_option("--out", a.out, "JSON output (stdout when omitted)");
  cmd->callback([&a, cmd] {
    const auto& spec = find_spec(a.spec);
    if (a.exact) {
      print_json(Json{{"auc", optimal_auc_exact(spec)}, {"stderr", 0.0}, {"samples", 0}, {"spec", a.spec}}, a.out);
      return;
    }
    if (cmd->count("--seed") == 0) throw CLI::RequiredError("--seed");
    const auto planted = generate(spec, derive_seed(a.seed, 1));
    const auto est = optimal_auc_mc(planted, a.samples, derive_seed(a.seed, 7), a.alpha, a.workers);
    print_json(Json{{"auc", est.auc},
                    {"stderr", est.standard_error},
                    {"samples", est.samples},
                    {"spec", a.spec},
                    {"seed", a.seed}},
               a.out);
  });
}

// saturate

struct SaturateArgs {
  std::string features;
  std::string model;
  std::size_t max_k = 15;
  int workers = 1;
  std::string out;
};

void add_saturate(CLI::App& app, SaturateArgs& a) {
  auto* cmd = app.add_subcommand("saturate", "AUC of top-k importance sub-stacks");
  cmd->add_option("--features", a.features, "Directory written by `features`")->required();
  cmd->add_option("--model", a.model, "Model JSON written by `stack`")->required();
  cmd->add_option("--max-k", a.max_k, "Largest k before the full column count")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "CSV output (stdout when omitted)");
  cmd->callback([&a] {
    const auto f = FeatureDir::load(a.features);
    const auto model = load_model(a.model);
    const std::size_t total = model.columns().size();
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= std::min(a.max_k, total); ++k) ks.push_back(k);
    if (ks.back() != total) ks.push_back(total);
    const auto curve = saturation_curve(model, f.train, f.train_labels, f.test, f.test_labels, ks, a.workers);
    std::ostringstream text;
    text << "k,auc\n";
    for (std::size_t i = 0; i < curve.ks.size(); ++i) text << curve.ks[i] << "," << curve.auc[i] << "\n";
    if (a.out.empty()) {
      std::cout << text.str();
    } else {
      open_out(a.out) << text.str();
    }
    std::cerr << "k* = " << curve.k_star << " (full AUC " << curve.full_auc << ")\n";
  });
}

// experiment

struct ExperimentArgs {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string output_dir;
};

void add_experiment(CLI::App& app, ExperimentArgs& a) {
  auto* cmd = app.add_subcommand("experiment", "Run a configured experiment end to end");
  cmd->add_option("--config", a.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Master seed (overrides the config)");
  cmd->add_option("--workers", a.workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--output-dir", a.output_dir, "Report directory (overrides the config)");
  cmd->callback([&a, cmd] {
    const Json raw = read_json_file(a.config);
    auto config = ExperimentConfig::load(a.config);
    if (cmd->count("--seed")) {
      config.seed = a.seed;
    } else if (!raw.contains("seed")) {
      throw CLI::RequiredError("--seed (or a \"seed\" key in the config)");
    }
    if (a.workers > 0) config.workers = a.workers;
    if (!a.output_dir.empty()) config.output_dir = a.output_dir;
    const auto result = run_experiment(config);
    std::cerr << result.cells.size() << " cells written to " << config.output_dir << "\n";
  });
}

// summarize

struct SummarizeArgs {
  std::vector<std::string> reports;
  std::string out;
};

void add_summarize(CLI::App& app, SummarizeArgs& a) {
  auto* cmd = app.add_subcommand("summarize", "Aggregate report directories");
  cmd->add_option("reports", a.reports, "Report directories")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--out", a.out, "CSV output (stdout when omitted)");
  cmd->callback([&a] {
    const auto rows = summarize(a.reports);
    const auto text = summary_csv(rows);
    if (a.out.empty()) {
      std::cout << text;
    } else {
      open_out(a.out) << text;
    }
    for (const auto& r : rows) {
      if (r.method == "stack:T+M" && r.group == "all" && r.gap_count > 0) {
        std::fprintf(stderr, "stack:T+M mean optimal-AUC gap %.4f over %zu cells (published reference %.3f)\n",
                     r.gap_mean, r.gap_count, kPublishedStackGap);
      }
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked link prediction with optimal-AUC bounds"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenerateArgs generate_args;
  FeaturesArgs features_args;
  StackArgs stack_args;
  EvaluateArgs evaluate_args;
  OracleArgs oracle_args;
  SaturateArgs saturate_args;
  ExperimentArgs experiment_args;
  SummarizeArgs summarize_args;
  add_generate(app, generate_args);
  add_features(app, features_args);
  add_stack(app, stack_args);
  add_evaluate(app, evaluate_args);
  add_oracle(app, oracle_args);
  add_saturate(app, saturate_args);
  add_experiment(app, experiment_args);
  add_summarize(app, summarize_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "stacklp: " << category_name(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "stacklp: io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "stacklp: internal error: " << e.what() << "\n";
    return kExitOther;
  }
  return 0;
}
