#include "stacklp/partition.hpp"

#include <ostream>
#include <unordered_map>

#include "stacklp/error.hpp"

namespace stacklp {

std::vector<BlockId> canonical_labels(std::span<const BlockId> assignment) {
  std::unordered_map<BlockId, BlockId> remap;
  std::vector<BlockId> out(assignment.size());
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    auto [it, inserted] = remap.try_emplace(assignment[v], static_cast<BlockId>(remap.size()));
    out[v] = it->second;
  }
  return out;
}

Partition::Partition(const Graph& graph, std::span<const BlockId> assignment) {
  require(assignment.size() == graph.node_count(), "partition size does not match graph");
  assignment_ = canonical_labels(assignment);
  std::size_t k = 0;
  for (BlockId b : assignment_) k = std::max<std::size_t>(k, b + 1);
  sizes_.assign(k, 0);
  degrees_.assign(k, 0);
  edges_.assign(k * k, 0);
  for (NodeId v = 0; v < assignment_.size(); ++v) {
    ++sizes_[assignment_[v]];
    degrees_[assignment_[v]] += graph.degree(v);
  }
  for (const auto& e : graph.edges()) {
    const BlockId r = assignment_[e.first];
    const BlockId s = assignment_[e.second];
    ++edges_[r * k + s];
    if (r != s) ++edges_[s * k + r];
  }
}

Partition Partition::single_block(const Graph& graph) {
  std::vector<BlockId> zeros(graph.node_count(), 0);
  return Partition(graph, zeros);
}

bool Partition::consistent_with(const Graph& graph) const {
  if (graph.node_count() != node_count()) return false;
  const Partition fresh(graph, assignment_);
  if (fresh.sizes_ != sizes_ || fresh.degrees_ != degrees_ || fresh.edges_ != edges_) return false;
  std::uint64_t within = 0, across = 0, degree_sum = 0, nodes = 0;
  for (BlockId r = 0; r < k(); ++r) {
    nodes += sizes_[r];
    degree_sum += degrees_[r];
    within += block_edges(r, r);
    for (BlockId s = r + 1; s < k(); ++s) across += block_edges(r, s);
  }
  return nodes == graph.node_count() && within + across == graph.edge_count() &&
         degree_sum == 2 * graph.edge_count();
}

void Partition::write_csv(std::ostream& out, const Graph* graph) const {
  out << "node,community\n";
  for (NodeId v = 0; v < assignment_.size(); ++v) {
    if (graph != nullptr) {
      out << graph->label(v);
    } else {
      out << v;
    }
    out << ',' << assignment_[v] << '\n';
  }
}

}  // namespace stacklp
