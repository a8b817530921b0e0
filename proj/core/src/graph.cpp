#include "stacklp/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "stacklp/error.hpp"

namespace stacklp {

void Graph::build(std::size_t node_count, std::vector<NodePair> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  offsets_.assign(node_count + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.first + 1];
    ++offsets_[e.second + 1];
  }
  for (std::size_t v = 0; v < node_count; ++v) offsets_[v + 1] += offsets_[v];
  adjacency_.assign(offsets_.back(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[cursor[e.first]++] = e.second;
    adjacency_[cursor[e.second]++] = e.first;
  }
  for (std::size_t v = 0; v < node_count; ++v) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
  }
}

Graph Graph::from_pairs(std::size_t node_count, std::span<const NodePair> edges,
                        IngestStats* stats) {
  std::vector<NodePair> kept;
  kept.reserve(edges.size());
  std::size_t loops = 0;
  for (const auto& e : edges) {
    if (e.second >= node_count) {
      fail(ErrorCategory::kInvalidArgument,
           "edge endpoint " + std::to_string(e.second) + " out of range for n=" +
               std::to_string(node_count));
    }
    if (e.first == e.second) {
      ++loops;
      continue;
    }
    kept.push_back(e);
  }
  const std::size_t before = kept.size();
  Graph g;
  g.build(node_count, std::move(kept));
  if (stats) {
    stats->records = edges.size();
    stats->self_loops_dropped = loops;
    stats->duplicates_dropped = before - g.edge_count();
  }
  return g;
}

Graph Graph::from_pairs(std::size_t node_count,
                        std::span<const std::pair<NodeId, NodeId>> edges, IngestStats* stats) {
  std::vector<NodePair> pairs;
  pairs.reserve(edges.size());
  for (const auto& [a, b] : edges) pairs.emplace_back(a, b);
  return from_pairs(node_count, pairs, stats);
}

Graph Graph::from_edge_list(std::span<const std::pair<std::string, std::string>> records,
                            IngestStats* stats) {
  if (records.empty()) fail(ErrorCategory::kData, "empty graph");
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  auto intern = [&](const std::string& token) {
    auto [it, inserted] = index.try_emplace(token, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(token);
    return it->second;
  };
  std::vector<NodePair> pairs;
  pairs.reserve(records.size());
  for (const auto& [a, b] : records) {
    const NodeId ia = intern(a);
    const NodeId ib = intern(b);
    pairs.emplace_back(ia, ib);
  }
  Graph g = from_pairs(labels.size(), pairs, stats);
  g.labels_ = std::move(labels);
  g.index_ = std::move(index);
  return g;
}

bool Graph::has_edge(NodeId a, NodeId b) const noexcept {
  if (a == b) return false;
  if (degree(a) > degree(b)) std::swap(a, b);
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::string Graph::label(NodeId v) const {
  return labels_.empty() ? std::to_string(v) : labels_[v];
}

std::optional<NodeId> Graph::index_of(std::string_view token) const {
  if (labels_.empty()) return std::nullopt;
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Graph Graph::remove_edges(std::span<const NodePair> subset) const {
  std::vector<NodePair> drop(subset.begin(), subset.end());
  std::sort(drop.begin(), drop.end());
  drop.erase(std::unique(drop.begin(), drop.end()), drop.end());
  for (const auto& e : drop) {
    if (e.second >= node_count() || !has_edge(e.first, e.second)) {
      fail(ErrorCategory::kInvalidArgument, "remove_edges: (" + std::to_string(e.first) + "," +
                                                std::to_string(e.second) + ") is not an edge");
    }
  }
  std::vector<NodePair> kept;
  kept.reserve(edges_.size() - drop.size());
  std::set_difference(edges_.begin(), edges_.end(), drop.begin(), drop.end(),
                      std::back_inserter(kept));
  Graph g;
  g.build(node_count(), std::move(kept));
  g.labels_ = labels_;
  g.index_ = index_;
  return g;
}

Graph Graph::relabel(std::span<const NodeId> permutation) const {
  require(permutation.size() == node_count(), "relabel: permutation size mismatch");
  std::vector<NodePair> mapped;
  mapped.reserve(edges_.size());
  for (const auto& e : edges_) mapped.emplace_back(permutation[e.first], permutation[e.second]);
  Graph g;
  g.build(node_count(), std::move(mapped));
  if (!labels_.empty()) {
    g.labels_.resize(labels_.size());
    for (std::size_t v = 0; v < labels_.size(); ++v) g.labels_[permutation[v]] = labels_[v];
    for (std::size_t v = 0; v < g.labels_.size(); ++v) {
      g.index_.emplace(g.labels_[v], static_cast<NodeId>(v));
    }
  }
  return g;
}

std::uint64_t Graph::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(node_count());
  for (const auto& e : edges_) feed((std::uint64_t{e.first} << 32) | e.second);
  return h;
}

std::uint64_t Graph::non_edge_count() const noexcept {
  const std::uint64_t n = node_count();
  return n * (n - (n > 0 ? 1 : 0)) / 2 - edge_count();
}

std::vector<NodePair> Graph::non_edges() const {
  std::vector<NodePair> out;
  out.reserve(non_edge_count());
  for_each_non_edge([&out](NodeId i, NodeId j) { out.emplace_back(i, j); });
  return out;
}

Graph read_edge_list(std::istream& in, IngestStats* stats) {
  std::vector<std::pair<std::string, std::string>> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      fail(ErrorCategory::kIo,
           "line " + std::to_string(line_no) + ": expected exactly two tokens");
    }
    records.emplace_back(std::move(a), std::move(b));
  }
  return Graph::from_edge_list(records, stats);
}

Graph read_edge_list_file(const std::string& path, IngestStats* stats) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open edge list '" + path + "'");
  try {
    return read_edge_list(in, stats);
  } catch (const Error& e) {
    fail(e.category(), path + ": " + e.what());
  }
}

void write_edge_list(std::ostream& out, const Graph& graph) {
  for (const auto& e : graph.edges()) {
    out << graph.label(e.first) << ' ' << graph.label(e.second) << '\n';
  }
}

void write_edge_list_file(const std::string& path, const Graph& graph) {
  std::ofstream out(path);
  if (!out) fail(ErrorCategory::kIo, "cannot write '" + path + "'");
  write_edge_list(out, graph);
}

}  // namespace stacklp
