#include "stacklp/modularity.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "agglomerate.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace detail {

std::vector<BlockId> agglomerate(const Graph& graph, std::size_t min_blocks, bool positive_only) {
  const std::size_t n = graph.node_count();
  const auto m = static_cast<std::int64_t>(graph.edge_count());
  std::vector<BlockId> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  if (m == 0) return parent;

  // Gains are kept as exact integers: 2 m^2 dQ = 2 m m_ij - d_i d_j.
  std::vector<std::unordered_map<BlockId, std::int64_t>> links(n);
  std::vector<std::int64_t> degree(n);
  std::vector<bool> alive(n, true);
  for (NodeId v = 0; v < n; ++v) {
    degree[v] = static_cast<std::int64_t>(graph.degree(v));
    for (NodeId u : graph.neighbors(v)) links[v][u] = 1;
  }
  auto gain = [&](BlockId a, BlockId b, std::int64_t count) {
    return 2 * m * count - degree[a] * degree[b];
  };
  struct Best {
    std::int64_t gain = std::numeric_limits<std::int64_t>::min();
    BlockId partner = std::numeric_limits<BlockId>::max();
  };
  auto better = [](std::int64_t g, BlockId p, const Best& b) {
    return g > b.gain || (g == b.gain && p < b.partner);
  };
  std::vector<Best> best(n);
  auto refresh = [&](BlockId a) {
    Best b;
    for (const auto& [u, count] : links[a]) {
      const auto g = gain(a, u, count);
      if (better(g, u, b)) b = {g, u};
    }
    best[a] = b;
  };
  for (BlockId a = 0; a < n; ++a) refresh(a);

  // Isolated nodes never merge, so they do not count toward the target.
  std::size_t communities = 0;
  for (NodeId v = 0; v < n; ++v) communities += graph.degree(v) > 0;
  while (communities > min_blocks) {
    BlockId a = std::numeric_limits<BlockId>::max();
    for (BlockId v = 0; v < n; ++v) {
      if (!alive[v] || links[v].empty()) continue;
      if (a == std::numeric_limits<BlockId>::max() || best[v].gain > best[a].gain) a = v;
    }
    if (a == std::numeric_limits<BlockId>::max()) break;
    if (positive_only && best[a].gain <= 0) break;
    BlockId keep = std::min(a, best[a].partner);
    BlockId gone = std::max(a, best[a].partner);

    links[keep].erase(gone);
    links[gone].erase(keep);
    for (const auto& [u, count] : links[gone]) {
      links[keep][u] += count;
      auto& back = links[u];
      back.erase(gone);
      back[keep] += count;
    }
    links[gone].clear();
    degree[keep] += degree[gone];
    alive[gone] = false;
    parent[gone] = keep;
    --communities;

    refresh(keep);
    for (const auto& [u, count] : links[keep]) {
      if (best[u].partner == keep || best[u].partner == gone) {
        refresh(u);
      } else {
        const auto g = gain(u, keep, count);
        if (better(g, keep, best[u])) best[u] = {g, keep};
      }
    }
  }

  std::vector<BlockId> assignment(n);
  for (NodeId v = 0; v < n; ++v) {
    BlockId r = v;
    while (parent[r] != r) r = parent[r];
    assignment[v] = r;
  }
  return assignment;
}

}  // namespace detail

double modularity(const Graph& graph, const Partition& partition) {
  const double m = static_cast<double>(graph.edge_count());
  if (m == 0) return 0.0;
  double q = 0.0;
  for (BlockId r = 0; r < partition.k(); ++r) {
    const double share = static_cast<double>(partition.block_degree(r)) / (2.0 * m);
    q += static_cast<double>(partition.block_edges(r, r)) / m - share * share;
  }
  return q;
}

Partition fit_modularity(const Graph& graph, std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  auto assignment = canonical_labels(detail::agglomerate(graph, 1, true));
  const auto m = static_cast<std::int64_t>(graph.edge_count());
  if (m == 0) return Partition(graph, assignment);

  std::size_t k = 0;
  for (BlockId b : assignment) k = std::max<std::size_t>(k, b + 1);
  std::vector<std::int64_t> block_degree(k, 0);
  for (NodeId v = 0; v < n; ++v) block_degree[assignment[v]] += static_cast<std::int64_t>(graph.degree(v));

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x51));
  rng.shuffle(order);

  std::unordered_map<BlockId, std::int64_t> counts;
  std::vector<BlockId> candidates;
  for (NodeId v : order) {
    const auto kv = static_cast<std::int64_t>(graph.degree(v));
    if (kv == 0) continue;
    counts.clear();
    candidates.clear();
    for (NodeId u : graph.neighbors(v)) {
      if (counts[assignment[u]]++ == 0) candidates.push_back(assignment[u]);
    }
    std::sort(candidates.begin(), candidates.end());
    const BlockId r = assignment[v];
    const std::int64_t to_own = counts.count(r) ? counts[r] : 0;
    // 2 m^2 dQ = 2 m (k_vs - k_vr) - k_v (d_s - d_r + k_v)
    std::int64_t best_gain = 0;
    BlockId best_block = r;
    for (BlockId s : candidates) {
      if (s == r) continue;
      const std::int64_t g =
          2 * m * (counts[s] - to_own) - kv * (block_degree[s] - block_degree[r] + kv);
      if (g > best_gain) {
        best_gain = g;
        best_block = s;
      }
    }
    if (best_block != r) {
      block_degree[r] -= kv;
      block_degree[best_block] += kv;
      assignment[v] = best_block;
    }
  }
  return Partition(graph, assignment);
}

std::vector<double> score_modularity(const Graph& graph, const Partition& partition,
                                     std::span<const NodePair> pairs) {
  const double m = static_cast<double>(graph.edge_count());
  double within = 0.0, square_sum = 0.0;
  for (BlockId r = 0; r < partition.k(); ++r) {
    within += static_cast<double>(partition.block_edges(r, r));
    const double d = static_cast<double>(partition.block_degree(r));
    square_sum += d * d;
  }
  const double base = m > 0 ? within / m - square_sum / (4.0 * m * m) : 0.0;
  const double m_new = m + 1.0;
  std::vector<double> out(pairs.size());
  for (std::size_t row = 0; row < pairs.size(); ++row) {
    const BlockId r = partition.block_of(pairs[row].first);
    const BlockId s = partition.block_of(pairs[row].second);
    const double dr = static_cast<double>(partition.block_degree(r));
    const double ds = static_cast<double>(partition.block_degree(s));
    double w = within, sq = square_sum;
    if (r == s) {
      w += 1.0;
      sq += 4.0 * dr + 4.0;
    } else {
      sq += 2.0 * dr + 1.0 + 2.0 * ds + 1.0;
    }
    out[row] = w / m_new - sq / (4.0 * m_new * m_new) - base;
  }
  return out;
}

}  // namespace stacklp
