#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "stacklp/error.hpp"
#include "stacklp/experiment.hpp"

namespace stacklp {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stacklp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCategory category_of(const std::string& json) {
  try {
    ExperimentConfig::parse(json);
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::kInternal;
}

TEST(Config, DefaultsApply) {
  const auto c = ExperimentConfig::parse(R"({"synthetic_suite": true, "seed": 3})");
  EXPECT_DOUBLE_EQ(c.alpha, 0.8);
  EXPECT_DOUBLE_EQ(c.alpha_prime, 0.8);
  EXPECT_TRUE(c.use_synthetic);
  ASSERT_EQ(c.stacks.size(), 1u);
  EXPECT_EQ(c.stacks[0].to_string(), "T+M");
  EXPECT_EQ(c.oracle_samples, 100000u);
}

TEST(Config, SchemaViolationsAreConfigErrors) {
  EXPECT_EQ(category_of(R"({"synthetic_suite": true, "alhpa": 0.5})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"synthetic_suite": true, "alpha": 1.5})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"synthetic_suite": true, "alpha": "high"})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"seed": 1})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"synthetic_suite": ["no-such-row"]})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"synthetic_suite": true, "stacks": ["X"]})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of(R"({"synthetic_suite": true, "objective": "accuracy"})"), ErrorCategory::kConfig);
  EXPECT_EQ(category_of("{not json"), ErrorCategory::kConfig);
}

TEST(Config, CanonicalJsonRoundTrips) {
  const auto c = ExperimentConfig::parse(
      R"({"synthetic_suite": ["low-poisson-k2"], "seed": 5, "seeds": 2, "stacks": ["all"], "negative_cap": 100})");
  EXPECT_EQ(c.stacks.size(), 7u);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  const auto again = ExperimentConfig::parse(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_EQ(again.hash(), c.hash());
  ExperimentConfig more_workers = c;
  more_workers.workers = 8;
  EXPECT_EQ(more_workers.hash(), c.hash());
  ExperimentConfig other_seed = c;
  other_seed.seed = 6;
  EXPECT_NE(other_seed.hash(), c.hash());
}

TEST(Config, RelativeInputsResolveAgainstBaseDir) {
  const auto c = ExperimentConfig::parse(R"({"inputs": ["nets/a.txt"], "seed": 1})", "/data/cfg");
  ASSERT_EQ(c.inputs.size(), 1u);
  EXPECT_EQ(c.inputs[0].path, "/data/cfg/nets/a.txt");
  EXPECT_EQ(c.inputs[0].name, "a");
}

ExperimentConfig small_real_config(const fs::path& out, int workers) {
  auto c = ExperimentConfig::parse(R"({
    "inputs": [{"path": ")" STACKLP_TEST_DATA_DIR R"(/karate.txt", "name": "karate", "domain": "social"},
               {"path": ")" STACKLP_TEST_DATA_DIR R"(/lesmis.txt", "name": "lesmis", "domain": "literature"}],
    "seed": 11, "seeds": 2, "predictors": ["JC", "model"], "stacks": ["T+M"],
    "saturation": {"stack": "T+M", "max_k": 3}
  })");
  c.output_dir = out.string();
  c.workers = workers;
  return c;
}

TEST(Experiment, OutputsDoNotDependOnWorkers) {
  const auto a = scratch_dir("workers1");
  const auto b = scratch_dir("workers3");
  const auto ra = run_experiment(small_real_config(a, 1));
  run_experiment(small_real_config(b, 3));
  for (const char* file : {"results.csv", "networks.csv", "saturation.csv", "lorenz.csv"}) {
    EXPECT_EQ(slurp(a / file), slurp(b / file)) << file;
  }
  EXPECT_EQ(slurp(a / "cells" / "karate_s1.json"), slurp(b / "cells" / "karate_s1.json"));
  EXPECT_EQ(ra.cells.size(), 4u);

  std::istringstream results(slurp(a / "results.csv"));
  std::string header;
  std::getline(results, header);
  EXPECT_EQ(header, "network,seed,method,auc,precision,recall,f1,oracle_auc,gap");
  std::set<std::string> methods;
  std::string line;
  while (std::getline(results, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    const auto third = line.find(',', second + 1);
    methods.insert(line.substr(second + 1, third - second - 1));
    EXPECT_EQ(line.substr(line.size() - 2), ",,");  // real networks carry no oracle
  }
  EXPECT_TRUE(methods.count("stack:T+M"));
  EXPECT_TRUE(methods.count("single:JC"));
  EXPECT_TRUE(methods.count("single:MDL-DCSBM"));
  EXPECT_TRUE(methods.count("vote"));

  const auto manifest = slurp(a / "manifest.json");
  EXPECT_NE(manifest.find("config_hash"), std::string::npos);
  EXPECT_NE(manifest.find("\"MDL-DCSBM\""), std::string::npos);
}

TEST(Experiment, SyntheticCellsReportOracleAndGap) {
  auto c = ExperimentConfig::parse(R"({"synthetic_suite": ["low-poisson-k4"], "seed": 2, "predictors": [],
    "majority_vote": false, "negative_cap": 2000, "test_negative_cap": 4000, "oracle_samples": 20000})");
  const auto cell = run_cell(c, NetworkInput{"low-poisson-k4", "", "synthetic"}, 1);
  ASSERT_TRUE(cell.oracle.has_value());
  EXPECT_NEAR(cell.oracle->auc, 0.875, 0.02);
  ASSERT_EQ(cell.methods.size(), 1u);
  const auto csv = results_csv({cell});
  EXPECT_NE(csv.find("low-poisson-k4,1,stack:T+M,"), std::string::npos);
  EXPECT_EQ(csv.find(",,"), std::string::npos);
}

TEST(Experiment, TinyNetworkIsActionableDataError) {
  const auto dir = scratch_dir("tiny");
  {
    std::ofstream(dir / "tiny.txt") << "a b\nb c\n";
  }
  auto c = ExperimentConfig::parse(R"({"inputs": ["tiny.txt"], "seed": 1})", dir.string());
  try {
    run_cell(c, c.inputs[0], 1);
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kData);
    EXPECT_NE(std::string(e.what()).find("tiny"), std::string::npos);
  }
}

void write_report(const fs::path& dir, const std::string& results, const std::string& networks) {
  fs::create_directories(dir);
  std::ofstream(dir / "results.csv") << "network,seed,method,auc,precision,recall,f1,oracle_auc,gap\n" << results;
  std::ofstream(dir / "networks.csv")
      << "network,seed,domain,nodes,edges,holdout_edges,training_positives,training_negatives,test_negatives,"
         "negative_weight\n"
      << networks;
}

TEST(Summarize, MeansAcrossReports) {
  const auto root = scratch_dir("summarize");
  write_report(root / "a", "n1,1,stack:T+M,0.800000,0.5,0.5,0.5,0.9,0.1\n", "n1,1,bio,10,150,30,24,100,100,1\n");
  write_report(root / "b", "n2,1,stack:T+M,0.900000,0.5,0.5,0.5,,\n", "n2,1,social,10,1500,30,24,100,100,1\n");
  const auto rows = summarize({(root / "a").string(), (root / "b").string()});
  std::map<std::string, SummaryRow> by_group;
  for (const auto& r : rows) by_group[r.group] = r;
  EXPECT_NEAR(by_group.at("all").auc_mean, 0.85, 1e-12);
  EXPECT_EQ(by_group.at("all").count, 2u);
  EXPECT_EQ(by_group.at("all").gap_count, 1u);
  EXPECT_NEAR(by_group.at("all").gap_mean, 0.1, 1e-12);
  EXPECT_EQ(by_group.at("size:<200").count + by_group.at("size:>1000").count, 2u);
  EXPECT_EQ(by_group.count("size:200-1000"), 0u);
  EXPECT_EQ(by_group.at("domain:bio").count, 1u);
}

TEST(Summarize, IncompatibleSchemaIsAnError) {
  const auto root = scratch_dir("schema");
  fs::create_directories(root / "bad");
  std::ofstream(root / "bad" / "results.csv") << "network,auc\nx,0.5\n";
  std::ofstream(root / "bad" / "networks.csv")
      << "network,seed,domain,nodes,edges,holdout_edges,training_positives,training_negatives,test_negatives,"
         "negative_weight\n";
  EXPECT_THROW(summarize({(root / "bad").string()}), Error);
}

}  // namespace
}  // namespace stacklp
