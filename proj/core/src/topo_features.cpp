#include "stacklp/topo_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "stacklp/error.hpp"
#include "stacklp/low_rank.hpp"
#include "stacklp/parallel.hpp"

namespace stacklp {

namespace {

constexpr std::size_t kSweepChunks = 64;

struct SweepResult {
  std::vector<double> betweenness;
  std::vector<double> load;
  std::vector<double> closeness;
  std::vector<std::uint32_t> eccentricity;
  std::vector<double> pair_hops;  // parallel to the requested pairs
};

struct PairIndex {
  std::vector<std::size_t> offsets;  // CSR over first endpoint
  std::vector<std::size_t> rows;
};

PairIndex index_by_first(std::size_t n, std::span<const NodePair> pairs) {
  PairIndex idx;
  idx.offsets.assign(n + 1, 0);
  for (const auto& p : pairs) ++idx.offsets[p.first + 1];
  for (std::size_t v = 0; v < n; ++v) idx.offsets[v + 1] += idx.offsets[v];
  idx.rows.resize(pairs.size());
  std::vector<std::size_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (std::size_t r = 0; r < pairs.size(); ++r) idx.rows[cursor[pairs[r].first]++] = r;
  return idx;
}

// One BFS per source feeding Brandes betweenness, load centrality
// (Newman's predecessor splitting), closeness, eccentricity and the
// requested pair distances. Sources are split into a fixed number of chunks
// with private accumulators, so the worker count never changes the sums.
SweepResult shortest_path_sweep(const Graph& graph, std::span<const NodePair> pairs,
                                bool centralities, int workers) {
  const std::size_t n = graph.node_count();
  SweepResult out;
  out.closeness.assign(n, 0.0);
  out.eccentricity.assign(n, 0);
  out.pair_hops.assign(pairs.size(), static_cast<double>(n));
  const PairIndex by_first = index_by_first(n, pairs);

  const std::size_t chunks = std::min(kSweepChunks, std::max<std::size_t>(n, 1));
  std::vector<std::vector<double>> chunk_bc(chunks), chunk_load(chunks);

  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const std::size_t begin = chunk * n / chunks;
    const std::size_t end = (chunk + 1) * n / chunks;
    std::vector<double>& bc = chunk_bc[chunk];
    std::vector<double>& ld = chunk_load[chunk];
    if (centralities) {
      bc.assign(n, 0.0);
      ld.assign(n, 0.0);
    }
    std::vector<std::int64_t> dist(n, -1);
    std::vector<double> sigma(n, 0.0), delta(n, 0.0), between(n, 0.0);
    std::vector<NodeId> order;
    order.reserve(n);
    for (std::size_t s = begin; s < end; ++s) {
      const auto source = static_cast<NodeId>(s);
      order.clear();
      dist[source] = 0;
      sigma[source] = 1.0;
      order.push_back(source);
      for (std::size_t head = 0; head < order.size(); ++head) {
        const NodeId v = order[head];
        for (NodeId w : graph.neighbors(v)) {
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            order.push_back(w);
          }
          if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
        }
      }
      double total = 0.0;
      for (NodeId v : order) total += static_cast<double>(dist[v]);
      const double reach = static_cast<double>(order.size());
      if (total > 0.0 && n > 1) {
        out.closeness[source] =
            (reach - 1.0) / total * ((reach - 1.0) / static_cast<double>(n - 1));
      }
      out.eccentricity[source] = static_cast<std::uint32_t>(dist[order.back()]);
      for (std::size_t k = by_first.offsets[source]; k < by_first.offsets[source + 1]; ++k) {
        const std::size_t row = by_first.rows[k];
        const auto d = dist[pairs[row].second];
        if (d >= 0) out.pair_hops[row] = static_cast<double>(d);
      }

      if (centralities) {
        // Brandes dependency accumulation in reverse BFS order.
        for (NodeId v : order) delta[v] = 0.0;
        for (std::size_t k = order.size(); k-- > 1;) {
          const NodeId w = order[k];
          const double coeff = (1.0 + delta[w]) / sigma[w];
          for (NodeId u : graph.neighbors(w)) {
            if (dist[u] == dist[w] - 1) delta[u] += sigma[u] * coeff;
          }
          bc[w] += delta[w];
        }
        // Load: process by decreasing (distance, id); each node's load is
        // split evenly over its shortest-path predecessors.
        std::vector<NodeId> by_level(order.begin() + 1, order.end());
        std::sort(by_level.begin(), by_level.end(), [&](NodeId a, NodeId b) {
          return dist[a] != dist[b] ? dist[a] > dist[b] : a > b;
        });
        for (NodeId v : order) between[v] = 1.0;
        for (NodeId v : by_level) {
          if (dist[v] < 2) continue;  // sole predecessor is the source
          std::size_t preds = 0;
          for (NodeId u : graph.neighbors(v)) preds += dist[u] == dist[v] - 1;
          const double share = between[v] / static_cast<double>(preds);
          for (NodeId u : graph.neighbors(v)) {
            if (dist[u] == dist[v] - 1) between[u] += share;
          }
        }
        for (NodeId v : by_level) ld[v] += between[v] - 1.0;
      }
      for (NodeId v : order) {
        dist[v] = -1;
        sigma[v] = 0.0;
      }
    }
  });

  if (centralities) {
    out.betweenness.assign(n, 0.0);
    out.load.assign(n, 0.0);
    for (std::size_t c = 0; c < chunks; ++c) {
      if (chunk_bc[c].empty()) continue;
      for (std::size_t v = 0; v < n; ++v) {
        out.betweenness[v] += chunk_bc[c][v];
        out.load[v] += chunk_load[c][v];
      }
    }
    if (n > 2) {
      const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
      for (std::size_t v = 0; v < n; ++v) {
        out.betweenness[v] *= scale;
        out.load[v] *= scale;
      }
    }
  }
  return out;
}

std::vector<std::uint32_t> component_labels(const Graph& graph, std::size_t& largest) {
  const std::size_t n = graph.node_count();
  std::vector<std::uint32_t> label(n, UINT32_MAX);
  std::vector<std::size_t> sizes;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (label[s] != UINT32_MAX) continue;
    const auto id = static_cast<std::uint32_t>(sizes.size());
    sizes.push_back(0);
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      ++sizes[id];
      for (NodeId w : graph.neighbors(v)) {
        if (label[w] == UINT32_MAX) {
          label[w] = id;
          stack.push_back(w);
        }
      }
    }
  }
  largest = static_cast<std::size_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  return label;
}

std::vector<double> local_clustering(const Graph& graph, const std::vector<double>& triangles) {
  std::vector<double> out(graph.node_count(), 0.0);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    const double d = static_cast<double>(graph.degree(v));
    if (d >= 2) out[v] = 2.0 * triangles[v] / (d * (d - 1.0));
  }
  return out;
}

GlobalFeatures globals_from(const Graph& graph, const std::vector<double>& triangles,
                            const std::vector<double>& clustering,
                            const std::vector<std::uint32_t>& eccentricity) {
  GlobalFeatures g;
  const std::size_t n = graph.node_count();
  const double nd = static_cast<double>(n);
  g.nodes = nd;
  g.observed_edges = static_cast<double>(graph.edge_count());
  if (n == 0) return g;
  g.average_degree = 2.0 * g.observed_edges / nd;
  double var = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const double diff = static_cast<double>(graph.degree(v)) - g.average_degree;
    var += diff * diff;
  }
  g.degree_variance = var / nd;

  std::size_t largest = 0;
  const auto comp = component_labels(graph, largest);
  std::uint32_t diameter = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (comp[v] == largest) diameter = std::max(diameter, eccentricity[v]);
  }
  g.diameter = diameter;

  // Newman's degree assortativity over both orientations of each edge.
  const double two_m = 2.0 * g.observed_edges;
  if (two_m > 0) {
    double sxy = 0, sx = 0, sxx = 0;
    for (const auto& e : graph.edges()) {
      const double a = static_cast<double>(graph.degree(e.first));
      const double b = static_cast<double>(graph.degree(e.second));
      sxy += 2.0 * a * b;
      sx += a + b;
      sxx += a * a + b * b;
    }
    const double mean = sx / two_m;
    const double denom = sxx / two_m - mean * mean;
    const double numer = sxy / two_m - mean * mean;
    g.degree_assortativity = denom > 1e-12 * std::max(1.0, mean * mean) ? numer / denom : 0.0;
  }

  double tri = 0, triples = 0, cc = 0;
  for (NodeId v = 0; v < n; ++v) {
    const double d = static_cast<double>(graph.degree(v));
    tri += triangles[v];
    triples += d * (d - 1.0) / 2.0;
    cc += clustering[v];
  }
  g.transitivity = triples > 0 ? tri / triples : 0.0;
  g.average_clustering = cc / nd;
  return g;
}

std::vector<double> normalized(std::vector<double> x) {
  double norm = 0.0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (double& v : x) v /= norm;
  }
  return x;
}

std::vector<double> multiply_adjacency(const Graph& graph, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    double s = 0.0;
    for (NodeId u : graph.neighbors(v)) s += x[u];
    y[v] = s;
  }
  return y;
}

// Power iteration on A + I (same leading eigenvector as A, no oscillation on
// bipartite components). Falls back to the degree vector on non-convergence.
std::vector<double> eigenvector_centrality(const Graph& graph, const TopoOptions& options,
                                           bool& converged, double& lambda_max) {
  const std::size_t n = graph.node_count();
  converged = false;
  lambda_max = 0.0;
  if (n == 0) return {};
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  x = normalized(x);
  if (graph.edge_count() == 0) {
    converged = true;
    return x;
  }
  for (int it = 0; it < options.eigen_max_iterations; ++it) {
    auto y = multiply_adjacency(graph, x);
    for (std::size_t v = 0; v < n; ++v) y[v] += x[v];
    y = normalized(y);
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) diff += std::abs(y[v] - x[v]);
    x = std::move(y);
    if (diff < static_cast<double>(n) * options.tolerance) {
      converged = true;
      break;
    }
  }
  const auto ax = multiply_adjacency(graph, x);
  for (std::size_t v = 0; v < n; ++v) lambda_max += x[v] * ax[v];
  if (!converged) {
    std::vector<double> deg(n);
    for (NodeId v = 0; v < n; ++v) deg[v] = static_cast<double>(graph.degree(v));
    return normalized(deg);
  }
  return x;
}

std::vector<double> katz_centrality(const Graph& graph, double lambda_max,
                                    const TopoOptions& options) {
  const std::size_t n = graph.node_count();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;
  const double attenuation = lambda_max > 0 ? options.katz_fraction / lambda_max : 0.0;
  for (int it = 0; it < options.eigen_max_iterations; ++it) {
    auto y = multiply_adjacency(graph, x);
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      y[v] = attenuation * y[v] + 1.0;
      diff += std::abs(y[v] - x[v]);
    }
    x = std::move(y);
    if (diff < static_cast<double>(n) * options.tolerance) break;
  }
  return normalized(x);
}

std::vector<double> pagerank(const Graph& graph, const TopoOptions& options) {
  const std::size_t n = graph.node_count();
  if (n == 0) return {};
  const double damping = options.pagerank_damping;
  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, uniform), next(n);
  for (int it = 0; it < options.pagerank_max_iterations; ++it) {
    double dangling = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (graph.degree(v) == 0) dangling += x[v];
    }
    const double base = (1.0 - damping) * uniform + damping * dangling * uniform;
    double diff = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double s = 0.0;
      for (NodeId u : graph.neighbors(v)) s += x[u] / static_cast<double>(graph.degree(u));
      next[v] = base + damping * s;
      diff += std::abs(next[v] - x[v]);
    }
    std::swap(x, next);
    if (diff < options.tolerance) break;
  }
  return x;
}

void fill_broadcast(PairFeatureTable& table, std::size_t first_col,
                    std::span<const double> values) {
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t k = 0; k < values.size(); ++k) table.at(r, first_col + k) = values[k];
  }
}

std::vector<ColumnInfo> topo_columns(const std::vector<std::string>& ids) {
  std::vector<ColumnInfo> cols;
  for (const auto& id : ids) cols.push_back({id, Family::kTopological});
  return cols;
}

// Row blocks are fixed-size so results never depend on the worker count.
template <class Fn>
void for_row_blocks(std::size_t rows, int workers, Fn&& fn) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (rows + kBlock - 1) / kBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t end = std::min(rows, (b + 1) * kBlock);
    for (std::size_t r = b * kBlock; r < end; ++r) fn(r);
  });
}

}  // namespace

std::vector<double> triangle_counts(const Graph& graph) {
  std::vector<double> tri(graph.node_count(), 0.0);
  for (const auto& e : graph.edges()) {
    auto a = graph.neighbors(e.first);
    auto b = graph.neighbors(e.second);
    // Count each triangle once via its largest vertex w > e.second.
    auto ia = std::upper_bound(a.begin(), a.end(), e.second);
    auto ib = std::upper_bound(b.begin(), b.end(), e.second);
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        tri[e.first] += 1;
        tri[e.second] += 1;
        tri[*ia] += 1;
        ++ia;
        ++ib;
      }
    }
  }
  return tri;
}

GlobalFeatures global_features(const Graph& graph) {
  const auto tri = triangle_counts(graph);
  const auto lcc = local_clustering(graph, tri);
  const auto sweep = shortest_path_sweep(graph, {}, false, 1);
  return globals_from(graph, tri, lcc, sweep.eccentricity);
}

std::vector<double> personalized_pagerank(const Graph& graph, double restart) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  // Solve (I - (1-c) W) X = c I with W = A D^-1 column-stochastic; isolated
  // nodes keep their mass (self-loop), matching restart-on-dangling.
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  const double follow = 1.0 - restart;
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto deg = graph.degree(static_cast<NodeId>(v));
    if (deg == 0) {
      system(v, v) -= follow;
      continue;
    }
    const double w = follow / static_cast<double>(deg);
    for (NodeId u : graph.neighbors(static_cast<NodeId>(v))) system(u, v) -= w;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const Eigen::MatrixXd x = lu.solve(Eigen::MatrixXd::Identity(n, n) * restart);
  // Column s of x is the walk restarting at s; store it as row s.
  std::vector<double> out(static_cast<std::size_t>(n * n));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), n, n) = x.transpose();
  return out;
}

std::vector<double> shortest_path_hops(const Graph& graph, std::span<const NodePair> pairs) {
  return shortest_path_sweep(graph, pairs, false, 1).pair_hops;
}

NodeMeasures node_measures(const Graph& graph, const TopoOptions& options) {
  const std::size_t n = graph.node_count();
  NodeMeasures m;
  m.triangles = triangle_counts(graph);
  m.clustering = local_clustering(graph, m.triangles);
  m.avg_neighbor_degree.assign(n, 0.0);
  m.degree_centrality.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    const auto nb = graph.neighbors(v);
    if (!nb.empty()) {
      double s = 0.0;
      for (NodeId u : nb) s += static_cast<double>(graph.degree(u));
      m.avg_neighbor_degree[v] = s / static_cast<double>(nb.size());
    }
    if (n > 1) m.degree_centrality[v] = static_cast<double>(nb.size()) / static_cast<double>(n - 1);
  }
  auto sweep = shortest_path_sweep(graph, {}, true, options.workers);
  m.betweenness = std::move(sweep.betweenness);
  m.load = std::move(sweep.load);
  m.closeness = std::move(sweep.closeness);
  m.eigenvector = eigenvector_centrality(graph, options, m.eigenvector_converged, m.lambda_max);
  m.katz = katz_centrality(graph, m.lambda_max, options);
  m.pagerank = pagerank(graph, options);
  return m;
}

const std::vector<std::string>& global_column_ids() {
  static const std::vector<std::string> ids = {"N", "OE", "AD", "VD", "ND", "DA", "NT", "ACC"};
  return ids;
}

const std::vector<std::string>& pairwise_column_ids() {
  static const std::vector<std::string> ids = {
      "CN",  "SP",  "LHN",  "PPR",  "PA",         "JC",          "AA",
      "RA",  "LRA", "dLRA", "mLRA", "LRA-approx", "dLRA-approx", "mLRA-approx"};
  return ids;
}

const std::vector<std::string>& node_column_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const char* base : {"LCC", "AND", "SPBC", "CC", "DC", "EC", "KC", "LNT", "PR", "LC"}) {
      out.push_back(std::string(base) + "_i");
      out.push_back(std::string(base) + "_j");
    }
    return out;
  }();
  return ids;
}

const std::vector<std::string>& topological_column_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out = global_column_ids();
    const auto& pw = pairwise_column_ids();
    const auto& nd = node_column_ids();
    out.insert(out.end(), pw.begin(), pw.end());
    out.insert(out.end(), nd.begin(), nd.end());
    return out;
  }();
  return ids;
}

PairFeatureTable global_table(const Graph& graph, std::span<const NodePair> pairs) {
  PairFeatureTable table({pairs.begin(), pairs.end()}, topo_columns(global_column_ids()));
  const auto g = global_features(graph).as_array();
  fill_broadcast(table, 0, g);
  return table;
}

PairFeatureTable pairwise_scores(const Graph& graph, std::span<const NodePair> pairs,
                                 const TopoOptions& options) {
  const std::size_t n = graph.node_count();
  for (const auto& p : pairs) {
    if (p.second >= n) fail(ErrorCategory::kInvalidArgument, "pair index out of range");
  }
  PairFeatureTable table({pairs.begin(), pairs.end()}, topo_columns(pairwise_column_ids()));
  if (n == 0 || pairs.empty()) return table;

  const auto hops = shortest_path_sweep(graph, pairs, false, options.workers).pair_hops;
  const auto ppr = personalized_pagerank(graph, options.ppr_restart);
  const std::size_t rank = options.lra_rank ? std::min(options.lra_rank, n)
                                            : LowRankApprox::default_rank(n);
  const auto lra = LowRankApprox::exact(graph, rank);
  const auto lra_approx = LowRankApprox::randomized(
      graph, rank, options.approx_power_steps, options.approx_oversampling, options.seed);

  for_row_blocks(pairs.size(), options.workers, [&](std::size_t r) {
    const NodeId i = pairs[r].first;
    const NodeId j = pairs[r].second;
    auto a = graph.neighbors(i);
    auto b = graph.neighbors(j);
    double cn = 0, aa = 0, ra = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        const double dz = static_cast<double>(graph.degree(*ia));
        cn += 1;
        aa += 1.0 / std::log(dz);  // dz >= 2 for any common neighbour
        ra += 1.0 / dz;
        ++ia;
        ++ib;
      }
    }
    const double di = static_cast<double>(a.size());
    const double dj = static_cast<double>(b.size());
    const double uni = di + dj - cn;
    double* row = &table.at(r, 0);
    row[0] = cn;
    row[1] = -hops[r];
    row[2] = di * dj > 0 ? cn / (di * dj) : 0.0;
    row[3] = 0.5 * (ppr[static_cast<std::size_t>(i) * n + j] +
                    ppr[static_cast<std::size_t>(j) * n + i]);
    row[4] = di * dj;
    row[5] = uni > 0 ? cn / uni : 0.0;
    row[6] = aa;
    row[7] = ra;
    row[8] = lra.entry(i, j);
    row[9] = lra.column_dot(i, j);
    row[10] = lra.neighbor_mean(i, j);
    row[11] = lra_approx.entry(i, j);
    row[12] = lra_approx.column_dot(i, j);
    row[13] = lra_approx.neighbor_mean(i, j);
  });
  return table;
}

PairFeatureTable node_features(const Graph& graph, std::span<const NodePair> pairs,
                               const TopoOptions& options) {
  PairFeatureTable table({pairs.begin(), pairs.end()}, topo_columns(node_column_ids()));
  if (pairs.empty()) return table;
  const NodeMeasures m = node_measures(graph, options);
  const std::vector<double>* measures[] = {
      &m.clustering, &m.avg_neighbor_degree, &m.betweenness, &m.closeness, &m.degree_centrality,
      &m.eigenvector, &m.katz, &m.triangles, &m.pagerank, &m.load};
  for_row_blocks(pairs.size(), options.workers, [&](std::size_t r) {
    double* row = &table.at(r, 0);
    for (std::size_t k = 0; k < std::size(measures); ++k) {
      row[2 * k] = (*measures[k])[pairs[r].first];
      row[2 * k + 1] = (*measures[k])[pairs[r].second];
    }
  });
  return table;
}

PairFeatureTable topological_features(const Graph& graph, std::span<const NodePair> pairs,
                                      const TopoOptions& options) {
  const NodeMeasures m = node_measures(graph, options);
  std::vector<PairFeatureTable> parts;
  {
    PairFeatureTable g({pairs.begin(), pairs.end()}, topo_columns(global_column_ids()));
    const auto sweep = shortest_path_sweep(graph, {}, false, 1);
    const auto globals = globals_from(graph, m.triangles, m.clustering, sweep.eccentricity);
    fill_broadcast(g, 0, globals.as_array());
    parts.push_back(std::move(g));
  }
  parts.push_back(pairwise_scores(graph, pairs, options));
  {
    PairFeatureTable nodes({pairs.begin(), pairs.end()}, topo_columns(node_column_ids()));
    const std::vector<double>* measures[] = {
        &m.clustering, &m.avg_neighbor_degree, &m.betweenness, &m.closeness,
        &m.degree_centrality, &m.eigenvector, &m.katz, &m.triangles, &m.pagerank, &m.load};
    for_row_blocks(pairs.size(), options.workers, [&](std::size_t r) {
      double* row = &nodes.at(r, 0);
      for (std::size_t k = 0; k < std::size(measures); ++k) {
        row[2 * k] = (*measures[k])[pairs[r].first];
        row[2 * k + 1] = (*measures[k])[pairs[r].second];
      }
    });
    parts.push_back(std::move(nodes));
  }
  return PairFeatureTable::hconcat(parts);
}

}  // namespace stacklp
