#include <benchmark/benchmark.h>

#include <vector>

#include "stacklp/embedding.hpp"
#include "stacklp/error.hpp"
#include "stacklp/forest.hpp"
#include "stacklp/holdout.hpp"
#include "stacklp/metrics.hpp"
#include "stacklp/oracle.hpp"
#include "stacklp/rng.hpp"
#include "stacklp/sbm_mdl.hpp"
#include "stacklp/synth.hpp"
#include "stacklp/topo_features.hpp"

namespace stacklp {
namespace {

const PlantedGraph& planted() {
  static const PlantedGraph g = [] {
    for (const auto& spec : builtin_suite()) {
      if (spec.name == "moderate-weibull-k4") return generate(spec, 1);
    }
    throw Error(ErrorCategory::kInternal, "missing benchmark row");
  }();
  return g;
}

std::vector<NodePair> sample_pairs(const Graph& graph, std::size_t count) {
  Rng rng(7);
  std::vector<NodePair> pairs;
  const auto n = graph.node_count();
  while (pairs.size() < count) {
    auto i = static_cast<NodeId>(rng.below(n)), j = static_cast<NodeId>(rng.below(n));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    pairs.emplace_back(i, j);
  }
  return pairs;
}

void BM_Auc(benchmark::State& state) {
  Rng rng(1);
  const auto size = static_cast<std::size_t>(state.range(0));
  std::vector<double> pos(size / 10), neg(size - size / 10);
  for (double& x : pos) x = rng.uniform();
  for (double& x : neg) x = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(auc(pos, neg));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Auc)->Range(1 << 10, 1 << 20);

void BM_PairwiseScores(benchmark::State& state) {
  const auto& graph = planted().graph;
  const auto pairs = sample_pairs(graph, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_scores(graph, pairs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_PairwiseScores)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_TopologicalFeatures(benchmark::State& state) {
  const auto& graph = planted().graph;
  const auto pairs = sample_pairs(graph, 5000);
  for (auto _ : state) benchmark::DoNotOptimize(topological_features(graph, pairs));
}
BENCHMARK(BM_TopologicalFeatures)->Unit(benchmark::kMillisecond);

void BM_MdlFit(benchmark::State& state) {
  const auto& graph = planted().graph;
  const auto variant = state.range(0) ? SbmVariant::kDegreeCorrected : SbmVariant::kStandard;
  for (auto _ : state) benchmark::DoNotOptimize(fit_sbm_mdl(graph, variant, 3));
}
BENCHMARK(BM_MdlFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Embedding(benchmark::State& state) {
  const auto& graph = planted().graph;
  EmbeddingParams params;
  params.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(deepwalk_embed(graph, params, 5));
}
BENCHMARK(BM_Embedding)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state) {
  const auto& graph = planted().graph;
  const auto split = sample_holdout(graph, 0.8, 2);
  std::vector<NodePair> pairs;
  std::vector<Label> labels;
  for (const auto& p : sample_pairs(graph, 4000)) {
    if (graph.has_edge(p.first, p.second)) continue;
    pairs.push_back(p);
    labels.push_back(Label::kNegative);
  }
  for (std::size_t i = 0; i < split.holdout_edges.size() && i < 400; ++i) {
    pairs.push_back(split.holdout_edges[i]);
    labels.push_back(Label::kPositive);
  }
  const auto table = topological_features(split.observed, pairs);
  ForestParams params;
  params.trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(table, labels, params, 4));
}
BENCHMARK(BM_TrainForest)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_OracleMonteCarlo(benchmark::State& state) {
  const auto& g = planted();
  const auto split = sample_holdout(g.graph, 0.8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_auc_mc(g, split, 100000, 6));
}
BENCHMARK(BM_OracleMonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stacklp

BENCHMARK_MAIN();
