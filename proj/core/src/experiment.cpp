#include "stacklp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stacklp/error.hpp"
#include "stacklp/metrics.hpp"
#include "stacklp/model_features.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/synth.hpp"
#include "stacklp/version.hpp"

namespace stacklp {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kResultsHeader = "network,seed,method,auc,precision,recall,f1,oracle_auc,gap";
constexpr const char* kNetworksHeader =
    "network,seed,domain,nodes,edges,holdout_edges,training_positives,training_negatives,test_negatives,"
    "negative_weight";
constexpr std::size_t kMinTrainingPositives = 5;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCategory::kIo, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCategory::kConfig, "config: " + what); }

void check_name(const std::string& name) {
  if (name.empty()) config_error("network names must not be empty");
  if (name.find_first_of(",\n\r\"") != std::string::npos) {
    config_error("network name '" + name + "' contains a comma, quote or newline");
  }
}

const SyntheticSpec& synthetic_spec(const std::string& name) {
  static const std::vector<SyntheticSpec> suite = builtin_suite();
  for (const auto& s : suite) {
    if (s.name == name) return s;
  }
  fail(ErrorCategory::kConfig, "unknown synthetic spec '" + name + "'");
}

Json embedding_to_json(const EmbeddingParams& p) {
  return Json{{"dims", p.dims},         {"walks_per_node", p.walks_per_node},
              {"walk_length", p.walk_length}, {"window", p.window},
              {"negatives", p.negatives}, {"epochs", p.epochs},
              {"learning_rate", p.learning_rate}, {"hogwild", p.hogwild}};
}

EmbeddingParams embedding_from_json(const Json& j) {
  static const std::set<std::string> keys{"dims",      "walks_per_node", "walk_length",   "window",
                                          "negatives", "epochs",         "learning_rate", "hogwild"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) config_error("unknown embedding key '" + k + "'");
  }
  EmbeddingParams p;
  p.dims = j.value("dims", p.dims);
  p.walks_per_node = j.value("walks_per_node", p.walks_per_node);
  p.walk_length = j.value("walk_length", p.walk_length);
  p.window = j.value("window", p.window);
  p.negatives = j.value("negatives", p.negatives);
  p.epochs = j.value("epochs", p.epochs);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.hogwild = j.value("hogwild", p.hogwild);
  return p;
}

FamilyMask families_needed(const ExperimentConfig& config) {
  FamilyMask mask;
  for (const auto& s : config.stacks) {
    for (Family f : {Family::kTopological, Family::kModel, Family::kEmbedding}) {
      if (s.contains(f)) mask.insert(f);
    }
  }
  if (config.saturation) {
    for (Family f : {Family::kTopological, Family::kModel, Family::kEmbedding}) {
      if (config.saturation->stack.contains(f)) mask.insert(f);
    }
  }
  for (const auto& p : config.predictors) {
    if (p == "all") {
      mask.insert(Family::kTopological);
      mask.insert(Family::kModel);
    } else if (p == "topological" || p == "model" || p == "embedding") {
      mask.insert(parse_family(p));
    }
  }
  if (config.majority_vote) mask.insert(Family::kModel);
  return mask;
}

/// Column indices scored on their own, in table order.
std::vector<std::size_t> single_columns(const ExperimentConfig& config, const PairFeatureTable& table) {
  std::set<std::size_t> chosen;
  for (const auto& p : config.predictors) {
    if (p == "all") {
      for (std::size_t c = 0; c < table.cols(); ++c) chosen.insert(c);
    } else if (p == "topological" || p == "model" || p == "embedding") {
      for (std::size_t c : table.columns_in(FamilyMask{parse_family(p)})) chosen.insert(c);
    } else {
      const auto idx = table.find(p);
      if (idx < 0) fail(ErrorCategory::kConfig, "unknown predictor column '" + p + "'");
      chosen.insert(static_cast<std::size_t>(idx));
    }
  }
  return {chosen.begin(), chosen.end()};
}

StackReport stack_report(const StackedModel& model) {
  StackReport r;
  r.stack = model.families.to_string();
  for (const auto& c : model.columns()) r.columns.push_back(c.id);
  r.importances = gini_importances(model);
  r.entropy = importance_entropy(r.importances);
  r.top_x = fit_top_x(r.importances);
  r.family_entropy = family_entropy(r.importances, model.columns());
  r.gini = lorenz_gini(r.importances).gini;
  r.validation_score = model.validation_score;
  r.max_depth = model.params().max_depth;
  r.min_leaf = model.params().min_leaf;
  return r;
}

MethodResult evaluate_scores(const std::string& method, std::span<const double> scores,
                             std::span<const Label> labels, double threshold, double negative_weight) {
  MethodResult m;
  m.method = method;
  m.auc = auc(scores, labels);
  const auto pr = precision_recall(scores, labels, threshold, negative_weight);
  m.precision = pr.precision;
  m.recall = pr.recall;
  m.f1 = pr.f1;
  m.threshold = threshold;
  return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCategory::kIo, where + ": not a number: '" + text + "'");
  }
}

}  // namespace

PairFeatureTable compute_features(const Graph& graph, std::span<const NodePair> pairs,
                                  const FamilyMask& families, const FeatureOptions& options,
                                  std::uint64_t seed) {
  require(!families.empty(), "no predictor families selected");
  std::vector<PairFeatureTable> parts;
  if (families.contains(Family::kTopological)) {
    TopoOptions topo = options.topo;
    topo.seed = derive_seed(seed, 0x70);
    topo.workers = options.workers;
    parts.push_back(topological_features(graph, pairs, topo));
  }
  if (families.contains(Family::kModel)) {
    ModelOptions model;
    model.seed = derive_seed(seed, 0x71);
    model.workers = options.workers;
    parts.push_back(model_features(graph, pairs, model));
  }
  if (families.contains(Family::kEmbedding)) {
    EmbeddingParams params = options.embedding;
    params.workers = options.workers;
    const auto emb = deepwalk_embed(graph, params, derive_seed(seed, 0x72));
    parts.push_back(pair_embed_features(emb, pairs));
  }
  auto table = PairFeatureTable::hconcat(parts);
  table.check_finite();
  return table;
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");
  static const std::set<std::string> keys{
      "inputs",      "synthetic_suite", "alpha",          "alpha_prime",       "seed",
      "seeds",       "predictors",      "stacks",         "objective",         "output_dir",
      "negative_cap", "test_negative_cap", "majority_vote", "oracle_samples",  "saturation",
      "embedding",   "folds",           "workers"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) config_error("unknown key '" + k + "'");
  }

  ExperimentConfig c;
  try {
    if (j.contains("inputs")) {
      for (const auto& item : j.at("inputs")) {
        NetworkInput in;
        if (item.is_string()) {
          in.path = item.get<std::string>();
        } else {
          for (const auto& [k, v] : item.items()) {
            if (k != "path" && k != "name" && k != "domain") config_error("unknown input key '" + k + "'");
          }
          in.path = item.at("path").get<std::string>();
          in.name = item.value("name", std::string());
          in.domain = item.value("domain", std::string());
        }
        if (in.path.empty()) config_error("input path must not be empty");
        if (in.name.empty()) in.name = fs::path(in.path).stem().string();
        if (!base_dir.empty() && fs::path(in.path).is_relative()) in.path = (fs::path(base_dir) / in.path).string();
        c.inputs.push_back(std::move(in));
      }
    }
    if (j.contains("synthetic_suite")) {
      const auto& s = j.at("synthetic_suite");
      if (s.is_boolean()) {
        c.use_synthetic = s.get<bool>();
      } else {
        c.use_synthetic = true;
        c.synthetic = s.get<std::vector<std::string>>();
        if (c.synthetic.empty()) config_error("synthetic_suite list is empty");
        for (const auto& name : c.synthetic) synthetic_spec(name);
      }
    }
    c.alpha = j.value("alpha", c.alpha);
    c.alpha_prime = j.value("alpha_prime", c.alpha_prime);
    c.seed = j.value("seed", c.seed);
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      if (s.is_number_unsigned()) {
        c.seeds.clear();
        for (std::uint64_t i = 1; i <= s.get<std::uint64_t>(); ++i) c.seeds.push_back(i);
      } else {
        c.seeds = s.get<std::vector<std::uint64_t>>();
      }
    }
    if (j.contains("predictors")) c.predictors = j.at("predictors").get<std::vector<std::string>>();
    if (j.contains("stacks")) {
      c.stacks.clear();
      for (const auto& s : j.at("stacks")) {
        const auto name = s.get<std::string>();
        if (name == "all") {
          const auto presets = FamilyMask::presets();
          c.stacks.insert(c.stacks.end(), presets.begin(), presets.end());
        } else {
          c.stacks.push_back(FamilyMask::parse(name));
        }
      }
    }
    if (j.contains("objective")) c.objective = parse_objective(j.at("objective").get<std::string>());
    c.output_dir = j.value("output_dir", c.output_dir);
    if (!base_dir.empty() && fs::path(c.output_dir).is_relative()) {
      c.output_dir = (fs::path(base_dir) / c.output_dir).string();
    }
    c.negative_cap = j.value("negative_cap", c.negative_cap);
    c.test_negative_cap = j.value("test_negative_cap", c.test_negative_cap);
    c.majority_vote = j.value("majority_vote", c.majority_vote);
    c.oracle_samples = j.value("oracle_samples", c.oracle_samples);
    if (j.contains("saturation") && !j.at("saturation").is_null()) {
      const auto& s = j.at("saturation");
      for (const auto& [k, v] : s.items()) {
        if (k != "stack" && k != "max_k") config_error("unknown saturation key '" + k + "'");
      }
      SaturationConfig sat;
      if (s.contains("stack")) sat.stack = FamilyMask::parse(s.at("stack").get<std::string>());
      sat.max_k = s.value("max_k", sat.max_k);
      c.saturation = sat;
    }
    if (j.contains("embedding")) c.embedding = embedding_from_json(j.at("embedding"));
    c.folds = j.value("folds", c.folds);
    c.workers = j.value("workers", c.workers);
  } catch (const Json::exception& e) {
    config_error(std::string("wrong value type: ") + e.what());
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kConfig) throw;
    config_error(e.what());
  }

  if (c.inputs.empty() && !c.use_synthetic) config_error("needs 'inputs' or 'synthetic_suite'");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) config_error("alpha must lie in (0, 1)");
  if (!(c.alpha_prime > 0.0 && c.alpha_prime < 1.0)) config_error("alpha_prime must lie in (0, 1)");
  if (c.seeds.empty()) config_error("seeds must not be empty");
  if (c.stacks.empty() && c.predictors.empty() && !c.majority_vote) config_error("nothing to evaluate");
  if (c.folds < 2) config_error("folds must be at least 2");
  if (c.workers < 1) config_error("workers must be at least 1");
  if (c.oracle_samples < 1) config_error("oracle_samples must be positive");
  if (c.saturation && c.saturation->max_k < 1) config_error("saturation max_k must be positive");
  if (c.embedding.dims < 2) config_error("embedding dims must be at least 2");
  std::set<std::string> names;
  for (const auto& in : c.inputs) {
    check_name(in.name);
    if (!names.insert(in.name).second) config_error("duplicate network name '" + in.name + "'");
  }
  for (const auto& name : c.synthetic) {
    if (!names.insert(name).second) config_error("duplicate network name '" + name + "'");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return parse(read_text(path), fs::path(path).parent_path().string());
}

std::string ExperimentConfig::to_json() const {
  Json j;
  Json inputs_json = Json::array();
  for (const auto& in : inputs) inputs_json.push_back({{"path", in.path}, {"name", in.name}, {"domain", in.domain}});
  j["inputs"] = inputs_json;
  if (use_synthetic && synthetic.empty()) {
    j["synthetic_suite"] = true;
  } else if (use_synthetic) {
    j["synthetic_suite"] = synthetic;
  } else {
    j["synthetic_suite"] = false;
  }
  j["alpha"] = alpha;
  j["alpha_prime"] = alpha_prime;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["predictors"] = predictors;
  Json stack_json = Json::array();
  for (const auto& s : stacks) stack_json.push_back(s.to_string());
  j["stacks"] = stack_json;
  j["objective"] = objective_name(objective);
  j["output_dir"] = output_dir;
  j["negative_cap"] = negative_cap;
  j["test_negative_cap"] = test_negative_cap;
  j["majority_vote"] = majority_vote;
  j["oracle_samples"] = oracle_samples;
  if (saturation) {
    j["saturation"] = {{"stack", saturation->stack.to_string()}, {"max_k", saturation->max_k}};
  } else {
    j["saturation"] = nullptr;
  }
  j["embedding"] = embedding_to_json(embedding);
  j["folds"] = folds;
  j["workers"] = workers;
  return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const {
  // Worker count and output location do not affect results.
  ExperimentConfig copy = *this;
  copy.workers = 1;
  copy.output_dir.clear();
  return fnv1a(copy.to_json());
}

std::string CellReport::to_json() const {
  Json j;
  j["network"] = network;
  j["domain"] = domain;
  j["replicate"] = replicate;
  j["seed"] = seed;
  j["synthetic"] = synthetic;
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["holdout_edges"] = holdout_edges;
  j["training_positives"] = training_positives;
  j["training_negatives"] = training_negatives;
  j["test_negatives"] = test_negatives;
  j["negative_weight"] = negative_weight;
  if (oracle) {
    j["oracle"] = {{"auc", oracle->auc}, {"stderr", oracle->standard_error}, {"samples", oracle->samples}};
  } else {
    j["oracle"] = nullptr;
  }
  Json methods_json = Json::array();
  for (const auto& m : methods) {
    methods_json.push_back({{"method", m.method}, {"auc", m.auc}, {"precision", m.precision},
                            {"recall", m.recall}, {"f1", m.f1}, {"threshold", m.threshold}});
  }
  j["methods"] = methods_json;
  Json stacks_json = Json::array();
  for (const auto& s : stacks) {
    stacks_json.push_back({{"stack", s.stack},
                           {"columns", s.columns},
                           {"importances", s.importances},
                           {"entropy_bits", s.entropy},
                           {"top_x_percent", s.top_x.percent},
                           {"top_x_count", s.top_x.count},
                           {"family_entropy_bits", s.family_entropy},
                           {"gini", s.gini},
                           {"validation_score", s.validation_score},
                           {"max_depth", s.max_depth},
                           {"min_leaf", s.min_leaf}});
  }
  j["stacks"] = stacks_json;
  if (saturation) {
    j["saturation"] = {{"ks", saturation->ks},
                       {"auc", saturation->auc},
                       {"full_auc", saturation->full_auc},
                       {"k_star", saturation->k_star},
                       {"ranking", saturation->ranking}};
  } else {
    j["saturation"] = nullptr;
  }
  j["warnings"] = warnings;
  return j.dump(2);
}

CellReport run_cell(const ExperimentConfig& config, const NetworkInput& input, std::uint64_t replicate) {
  CellReport cell;
  cell.network = input.name;
  cell.domain = input.domain;
  cell.replicate = replicate;
  cell.seed = derive_seed(derive_seed(config.seed, fnv1a(input.name)), replicate);
  const std::uint64_t s = cell.seed;

  std::optional<PlantedGraph> planted;
  Graph graph;
  if (input.path.empty()) {
    planted = generate(synthetic_spec(input.name), derive_seed(s, 1));
    graph = planted->graph;
    cell.synthetic = true;
    cell.warnings = planted->warnings;
  } else {
    graph = read_edge_list_file(input.path);
  }
  cell.nodes = graph.node_count();
  cell.edges = graph.edge_count();

  const auto split = sample_holdout(graph, config.alpha, derive_seed(s, 2));
  if (split.holdout_edges.empty()) {
    fail(ErrorCategory::kData, "network '" + input.name + "' has too few edges for alpha = " +
                                   fixed(config.alpha, 3) + " (no held-out edges)");
  }
  const auto training = build_training_instance(split, config.alpha_prime, derive_seed(s, 3), config.negative_cap);
  if (training.positive_count < std::max<std::size_t>(kMinTrainingPositives, static_cast<std::size_t>(config.folds))) {
    fail(ErrorCategory::kData, "network '" + input.name + "' yields only " + std::to_string(training.positive_count) +
                                   " training positives; lower alpha_prime or use a larger network");
  }
  const auto candidates = build_candidates(split, derive_seed(s, 4), config.test_negative_cap);
  cell.holdout_edges = split.holdout_edges.size();
  cell.training_positives = training.positive_count;
  cell.training_negatives = training.negative_count;
  cell.test_negatives = candidates.pairs.size() - split.holdout_edges.size();
  cell.negative_weight = candidates.negative_weight;
  if (training.negatives_capped) cell.warnings.push_back("training negatives subsampled");
  if (candidates.negative_weight > 1.0) cell.warnings.push_back("test negatives subsampled");

  FeatureOptions fopt;
  fopt.embedding = config.embedding;
  fopt.workers = 1;
  const FamilyMask families = families_needed(config);
  const auto train_table = compute_features(training.feature_graph, training.pairs, families, fopt, derive_seed(s, 5));
  const auto test_table = compute_features(split.observed, candidates.pairs, families, fopt, derive_seed(s, 6));
  const auto& train_labels = training.labels;
  const auto& test_labels = candidates.labels;
  const double weight = candidates.negative_weight;
  const double train_weight = training.negative_count == 0
                                  ? 1.0
                                  : static_cast<double>(training.negatives_available) /
                                        static_cast<double>(training.negative_count);

  std::map<std::uint8_t, StackedModel> trained;
  auto stack_for = [&](const FamilyMask& mask) -> const StackedModel& {
    auto it = trained.find(mask.bits());
    if (it != trained.end()) return it->second;
    StackOptions opt;
    opt.families = mask;
    opt.objective = config.objective;
    opt.folds = config.folds;
    opt.workers = 1;
    opt.negative_weight = train_weight;
    return trained.emplace(mask.bits(), train_stack(train_table, train_labels, opt, derive_seed(s, 0x20 + mask.bits())))
        .first->second;
  };

  for (const auto& mask : config.stacks) {
    const auto& model = stack_for(mask);
    const auto scores = predict_scores(model, test_table);
    cell.methods.push_back(evaluate_scores("stack:" + mask.to_string(), scores, test_labels, model.threshold, weight));
    cell.stacks.push_back(stack_report(model));
  }

  for (std::size_t c : single_columns(config, train_table)) {
    const auto& id = train_table.columns()[c].id;
    const auto learner = fit_weak_learner(id, train_table.column(c), train_labels, train_weight);
    const auto test_col = test_table.column(static_cast<std::size_t>(test_table.find(id)));
    cell.methods.push_back(
        evaluate_scores("single:" + id, learner.scores(test_col), test_labels, learner.threshold, weight));
  }

  if (config.majority_vote) {
    const auto cols = test_table.columns_in(FamilyMask{Family::kModel});
    const double total = static_cast<double>(training.positive_count) +
                         static_cast<double>(training.negatives_available);
    const double q = static_cast<double>(training.positive_count) / total;
    const auto votes = majority_vote(test_table, cols, q);
    const double majority = std::floor(static_cast<double>(cols.size()) / 2.0) + 1.0;
    cell.methods.push_back(evaluate_scores("vote", votes, test_labels, majority, weight));
  }

  if (config.saturation) {
    const auto& model = stack_for(config.saturation->stack);
    const std::size_t f = model.columns().size();
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= std::min(config.saturation->max_k, f); ++k) ks.push_back(k);
    if (ks.back() != f) ks.push_back(f);
    cell.saturation = saturation_curve(model, train_table, train_labels, test_table, test_labels, ks);
  }

  if (planted) cell.oracle = optimal_auc_mc(*planted, split, config.oracle_samples, derive_seed(s, 7));
  return cell;
}

std::string results_csv(const std::vector<CellReport>& cells) {
  struct Row {
    std::string network;
    std::uint64_t seed;
    std::string method;
    std::string text;
  };
  std::vector<Row> rows;
  for (const auto& cell : cells) {
    for (const auto& m : cell.methods) {
      std::string line = cell.network + "," + std::to_string(cell.replicate) + "," + m.method + "," + fixed(m.auc) +
                         "," + fixed(m.precision) + "," + fixed(m.recall) + "," + fixed(m.f1) + ",";
      if (cell.oracle) {
        line += fixed(cell.oracle->auc) + "," + fixed(cell.oracle->auc - m.auc);
      } else {
        line += ",";
      }
      rows.push_back({cell.network, cell.replicate, m.method, std::move(line)});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.network, a.seed, a.method) < std::tie(b.network, b.seed, b.method);
  });
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) out += r.text + "\n";
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  std::vector<NetworkInput> networks = config.inputs;
  if (config.use_synthetic) {
    if (config.synthetic.empty()) {
      for (const auto& spec : builtin_suite()) networks.push_back({spec.name, "", "synthetic"});
    } else {
      for (const auto& name : config.synthetic) networks.push_back({name, "", "synthetic"});
    }
  }
  struct Task {
    std::size_t network;
    std::uint64_t replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < networks.size(); ++i) {
    for (auto r : config.seeds) tasks.push_back({i, r});
  }

  ExperimentResult result;
  result.cells.resize(tasks.size());
  parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
    result.cells[t] = run_cell(config, networks[tasks[t].network], tasks[t].replicate);
  });

  std::vector<std::string> columns;
  {
    const FamilyMask families = families_needed(config);
    if (families.contains(Family::kTopological)) {
      for (const auto& id : topological_column_ids()) columns.push_back(id);
    }
    if (families.contains(Family::kModel)) {
      for (const auto& id : model_column_ids()) columns.push_back(id);
    }
    if (families.contains(Family::kEmbedding)) {
      for (const auto& id : embedding_column_ids(config.embedding.dims)) columns.push_back(id);
    }
  }
  result.columns = columns;

  const fs::path out(config.output_dir);
  std::error_code ec;
  fs::create_directories(out / "cells", ec);
  if (ec) fail(ErrorCategory::kIo, "cannot create output directory " + out.string() + ": " + ec.message());

  write_text(out / "results.csv", results_csv(result.cells));

  std::vector<const CellReport*> ordered;
  for (const auto& c : result.cells) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(), [](const CellReport* a, const CellReport* b) {
    return std::tie(a->network, a->replicate) < std::tie(b->network, b->replicate);
  });

  std::string networks_csv = std::string(kNetworksHeader) + "\n";
  std::string saturation_csv = "network,seed,k,auc,full_auc,k_star\n";
  std::string lorenz_csv = "network,seed,stack,cum_features,cum_importance\n";
  Json cells_index = Json::array();
  std::vector<std::string> warnings;
  for (const CellReport* c : ordered) {
    networks_csv += c->network + "," + std::to_string(c->replicate) + "," + c->domain + "," +
                    std::to_string(c->nodes) + "," + std::to_string(c->edges) + "," +
                    std::to_string(c->holdout_edges) + "," + std::to_string(c->training_positives) + "," +
                    std::to_string(c->training_negatives) + "," + std::to_string(c->test_negatives) + "," +
                    fixed(c->negative_weight) + "\n";
    if (c->saturation) {
      for (std::size_t i = 0; i < c->saturation->ks.size(); ++i) {
        saturation_csv += c->network + "," + std::to_string(c->replicate) + "," +
                          std::to_string(c->saturation->ks[i]) + "," + fixed(c->saturation->auc[i]) + "," +
                          fixed(c->saturation->full_auc) + "," + std::to_string(c->saturation->k_star) + "\n";
      }
    }
    for (const auto& st : c->stacks) {
      for (const auto& [x, y] : lorenz_gini(st.importances).points) {
        lorenz_csv += c->network + "," + std::to_string(c->replicate) + "," + st.stack + "," + fixed(x) + "," +
                      fixed(y) + "\n";
      }
    }
    const std::string file = file_stem(c->network) + "_s" + std::to_string(c->replicate) + ".json";
    write_text(out / "cells" / file, c->to_json() + "\n");
    cells_index.push_back({{"network", c->network}, {"replicate", c->replicate}, {"seed", c->seed}, {"file", file}});
    for (const auto& w : c->warnings) warnings.push_back(c->network + " seed " + std::to_string(c->replicate) + ": " + w);
  }
  write_text(out / "networks.csv", networks_csv);
  if (config.saturation) write_text(out / "saturation.csv", saturation_csv);
  if (!config.stacks.empty()) write_text(out / "lorenz.csv", lorenz_csv);

  Json manifest;
  manifest["tool"] = "stacklp";
  manifest["version"] = kVersion;
  manifest["config"] = Json::parse(config.to_json());
  manifest["config_hash"] = hex64(config.hash());
  manifest["cells"] = cells_index;
  manifest["columns"] = columns;
  manifest["negative_cap"] = config.negative_cap;
  manifest["test_negative_cap"] = config.test_negative_cap;
  manifest["deterministic"] = !(config.embedding.hogwild && families_needed(config).contains(Family::kEmbedding));
  manifest["warnings"] = warnings;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<std::string>& report_dirs) {
  require(!report_dirs.empty(), "summarize needs at least one report directory");
  struct Record {
    std::string method;
    double auc, precision, recall, f1;
    std::optional<double> gap;
    std::vector<std::string> groups;
  };
  std::vector<Record> records;
  for (const auto& dir : report_dirs) {
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::string>> meta;
    {
      std::istringstream in(read_text(fs::path(dir) / "networks.csv"));
      std::string line;
      std::getline(in, line);
      if (line != kNetworksHeader) fail(ErrorCategory::kIo, dir + "/networks.csv: incompatible schema");
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) fail(ErrorCategory::kIo, dir + "/networks.csv: malformed row");
        meta[{f[0], f[1]}] = {static_cast<std::size_t>(parse_number(f[4], dir)), f[2]};
      }
    }
    std::istringstream in(read_text(fs::path(dir) / "results.csv"));
    std::string line;
    std::getline(in, line);
    if (line != kResultsHeader) fail(ErrorCategory::kIo, dir + "/results.csv: incompatible schema");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 9) fail(ErrorCategory::kIo, dir + "/results.csv: malformed row");
      const auto it = meta.find({f[0], f[1]});
      if (it == meta.end()) fail(ErrorCategory::kIo, dir + ": network '" + f[0] + "' missing from networks.csv");
      Record r{f[2], parse_number(f[3], dir), parse_number(f[4], dir), parse_number(f[5], dir),
               parse_number(f[6], dir), std::nullopt, {"all"}};
      if (!f[8].empty()) r.gap = parse_number(f[8], dir);
      const std::size_t m = it->second.first;
      r.groups.push_back(m < 200 ? "size:<200" : m <= 1000 ? "size:200-1000" : "size:>1000");
      if (!it->second.second.empty()) r.groups.push_back("domain:" + it->second.second);
      records.push_back(std::move(r));
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<const Record*>> groups;
  for (const auto& r : records) {
    for (const auto& g : r.groups) groups[{r.method, g}].push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::pair{mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
  };
  std::vector<SummaryRow> rows;
  for (const auto& [key, recs] : groups) {
    SummaryRow row;
    row.method = key.first;
    row.group = key.second;
    row.count = recs.size();
    std::vector<double> aucs, gaps;
    double p = 0, r = 0, f1 = 0;
    for (const Record* rec : recs) {
      aucs.push_back(rec->auc);
      p += rec->precision;
      r += rec->recall;
      f1 += rec->f1;
      if (rec->gap) gaps.push_back(*rec->gap);
    }
    std::tie(row.auc_mean, row.auc_std) = mean_std(aucs);
    const double n = static_cast<double>(recs.size());
    row.precision_mean = p / n;
    row.recall_mean = r / n;
    row.f1_mean = f1 / n;
    row.gap_count = gaps.size();
    if (!gaps.empty()) std::tie(row.gap_mean, row.gap_std) = mean_std(gaps);
    rows.push_back(row);
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,group,count,auc_mean,auc_std,precision_mean,recall_mean,f1_mean,gap_count,gap_mean,gap_std\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.group + "," + std::to_string(r.count) + "," + fixed(r.auc_mean) + "," +
           fixed(r.auc_std) + "," + fixed(r.precision_mean) + "," + fixed(r.recall_mean) + "," + fixed(r.f1_mean) +
           "," + std::to_string(r.gap_count) + "," + (r.gap_count ? fixed(r.gap_mean) : "") + "," +
           (r.gap_count ? fixed(r.gap_std) : "") + "\n";
  }
  return out;
}

}  // namespace stacklp
