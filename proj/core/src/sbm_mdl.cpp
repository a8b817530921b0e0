#include "stacklp/sbm_mdl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "agglomerate.hpp"
#include "stacklp/error.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

constexpr double kMinImprovement = 1e-9;

class LogFactorial {
 public:
  explicit LogFactorial(std::uint64_t hint) {
    const std::uint64_t size = std::min<std::uint64_t>(hint + 1, kMaxTable);
    table_.resize(size);
    table_[0] = 0.0;
    for (std::uint64_t i = 1; i < size; ++i) table_[i] = table_[i - 1] + std::log(static_cast<double>(i));
  }

  double operator()(std::int64_t x) const {
    if (x < 0) return std::numeric_limits<double>::infinity();
    const auto u = static_cast<std::uint64_t>(x);
    return u < table_.size() ? table_[u] : std::lgamma(static_cast<double>(u) + 1.0);
  }

  double choose(std::int64_t a, std::int64_t b) const {
    if (b < 0 || b > a) return std::numeric_limits<double>::infinity();
    return (*this)(a) - (*this)(b) - (*this)(a - b);
  }

 private:
  static constexpr std::uint64_t kMaxTable = std::uint64_t{1} << 22;
  std::vector<double> table_;
};

/// Mutable block statistics with exact description-length deltas (nats).
class BlockState {
 public:
  BlockState(const Graph& graph, SbmVariant variant)
      : graph_(graph),
        variant_(variant),
        nodes_(static_cast<std::int64_t>(graph.node_count())),
        edges_(static_cast<std::int64_t>(graph.edge_count())),
        lf_(std::max<std::uint64_t>(graph.node_count() * (graph.node_count() + 1) / 2,
                                    4 * graph.edge_count() + graph.node_count() + 1)) {
    for (NodeId v = 0; v < graph.node_count(); ++v) {
      degree_log_sum_ += lf_(static_cast<std::int64_t>(graph.degree(v)));
    }
  }

  void load(std::span<const BlockId> assignment) {
    assignment_ = canonical_labels(assignment);
    blocks_ = 0;
    for (BlockId b : assignment_) blocks_ = std::max<std::size_t>(blocks_, b + 1);
    size_.assign(blocks_, 0);
    degree_.assign(blocks_, 0);
    matrix_.assign(blocks_ * blocks_, 0);
    for (NodeId v = 0; v < assignment_.size(); ++v) {
      ++size_[assignment_[v]];
      degree_[assignment_[v]] += static_cast<std::int64_t>(graph_.degree(v));
    }
    for (const auto& e : graph_.edges()) {
      const BlockId r = assignment_[e.first];
      const BlockId s = assignment_[e.second];
      ++at(r, s);
      if (r != s) ++at(s, r);
    }
    scratch_.assign(blocks_, 0);
    total_ = full_length();
  }

  std::size_t blocks() const { return blocks_; }
  double total() const { return total_; }
  const std::vector<BlockId>& assignment() const { return assignment_; }

  double full_length() const {
    double dl = global_term(blocks_);
    for (BlockId r = 0; r < blocks_; ++r) {
      dl += block_term(size_[r], degree_[r]) + self_term(size_[r], at(r, r));
      for (BlockId s = r + 1; s < blocks_; ++s) dl += pair_term(size_[r], size_[s], at(r, s));
    }
    return dl;
  }

  /// Sweeps nodes in `order`, moving each to the neighbouring block with the
  /// largest strict decrease. Returns the number of accepted moves.
  std::size_t sweep(std::span<const NodeId> order, std::size_t phase,
                    std::vector<MdlTracePoint>& trace) {
    std::size_t moved = 0;
    std::vector<BlockId> touched;
    for (NodeId v : order) {
      const BlockId r = assignment_[v];
      if (size_[r] < 2 || graph_.degree(v) == 0) continue;
      touched.clear();
      for (NodeId u : graph_.neighbors(v)) {
        if (scratch_[assignment_[u]]++ == 0) touched.push_back(assignment_[u]);
      }
      std::sort(touched.begin(), touched.end());
      double best = -kMinImprovement;
      BlockId target = r;
      for (BlockId s : touched) {
        if (s == r) continue;
        const double delta = move_delta(v, r, s);
        if (delta < best - 1e-12) {
          best = delta;
          target = s;
        }
      }
      if (target != r) {
        apply_move(v, r, target);
        total_ += best;
        ++moved;
        trace.push_back({phase, blocks_, total_ / std::numbers::ln2});
      }
      for (BlockId t : touched) scratch_[t] = 0;
    }
    return moved;
  }

  /// Description-length change of merging blocks r and s.
  double merge_delta(BlockId r, BlockId s) const {
    double before = row_pair_terms(r, s);
    const std::int64_t n = size_[r] + size_[s];
    const std::int64_t d = degree_[r] + degree_[s];
    double after = block_term(n, d) + self_term(n, at(r, r) + at(s, s) + at(r, s));
    for (BlockId t = 0; t < blocks_; ++t) {
      if (t == r || t == s) continue;
      after += pair_term(n, size_[t], at(r, t) + at(s, t));
    }
    return after - before + global_term(blocks_ - 1) - global_term(blocks_);
  }

  /// Applies a set of disjoint merges (pairs r < s) and rebuilds.
  void merge(std::span<const std::pair<BlockId, BlockId>> merges) {
    std::vector<BlockId> target(blocks_);
    std::iota(target.begin(), target.end(), 0);
    for (const auto& [r, s] : merges) target[s] = r;
    std::vector<BlockId> next(assignment_.size());
    for (std::size_t v = 0; v < next.size(); ++v) next[v] = target[assignment_[v]];
    load(next);
  }

 private:
  std::int64_t& at(BlockId r, BlockId s) { return matrix_[r * blocks_ + s]; }
  std::int64_t at(BlockId r, BlockId s) const { return matrix_[r * blocks_ + s]; }

  bool corrected() const { return variant_ == SbmVariant::kDegreeCorrected; }

  double global_term(std::size_t blocks) const {
    const auto b = static_cast<std::int64_t>(blocks);
    double dl = lf_.choose(nodes_ - 1, b - 1) + lf_(nodes_) + std::log(static_cast<double>(nodes_));
    dl += lf_.choose(b * (b + 1) / 2 + edges_ - 1, edges_);
    if (corrected()) dl -= degree_log_sum_;
    return dl;
  }

  double block_term(std::int64_t size, std::int64_t degree) const {
    double dl = -lf_(size);
    if (corrected()) dl += lf_(degree) + lf_.choose(size + degree - 1, degree);
    return dl;
  }

  double self_term(std::int64_t size, std::int64_t within) const {
    if (corrected()) return -lf_(within) - static_cast<double>(within) * std::numbers::ln2;
    return lf_.choose(size * (size - 1) / 2, within);
  }

  double pair_term(std::int64_t size_a, std::int64_t size_b, std::int64_t between) const {
    if (corrected()) return -lf_(between);
    return lf_.choose(size_a * size_b, between);
  }

  /// All terms that involve block r or block s.
  double row_pair_terms(BlockId r, BlockId s) const {
    double dl = block_term(size_[r], degree_[r]) + block_term(size_[s], degree_[s]) +
                self_term(size_[r], at(r, r)) + self_term(size_[s], at(s, s)) +
                pair_term(size_[r], size_[s], at(r, s));
    for (BlockId t = 0; t < blocks_; ++t) {
      if (t == r || t == s) continue;
      dl += pair_term(size_[r], size_[t], at(r, t)) + pair_term(size_[s], size_[t], at(s, t));
    }
    return dl;
  }

  // scratch_ holds the neighbour count of v per block.
  double move_delta(NodeId v, BlockId r, BlockId s) const {
    const auto kv = static_cast<std::int64_t>(graph_.degree(v));
    const std::int64_t nr = size_[r] - 1, ns = size_[s] + 1;
    const std::int64_t dr = degree_[r] - kv, ds = degree_[s] + kv;
    const std::int64_t to_r = scratch_[r], to_s = scratch_[s];
    double before = block_term(size_[r], degree_[r]) + block_term(size_[s], degree_[s]) +
                    self_term(size_[r], at(r, r)) + self_term(size_[s], at(s, s)) +
                    pair_term(size_[r], size_[s], at(r, s));
    double after = block_term(nr, dr) + block_term(ns, ds) + self_term(nr, at(r, r) - to_r) +
                   self_term(ns, at(s, s) + to_s) + pair_term(nr, ns, at(r, s) - to_s + to_r);
    for (BlockId t = 0; t < blocks_; ++t) {
      if (t == r || t == s) continue;
      const std::int64_t kt = scratch_[t];
      if (corrected() && kt == 0) continue;  // terms independent of block sizes
      before += pair_term(size_[r], size_[t], at(r, t)) + pair_term(size_[s], size_[t], at(s, t));
      after += pair_term(nr, size_[t], at(r, t) - kt) + pair_term(ns, size_[t], at(s, t) + kt);
    }
    return after - before;
  }

  void apply_move(NodeId v, BlockId r, BlockId s) {
    const auto kv = static_cast<std::int64_t>(graph_.degree(v));
    const std::int64_t to_r = scratch_[r], to_s = scratch_[s];
    for (BlockId t = 0; t < blocks_; ++t) {
      if (t == r || t == s) continue;
      const std::int64_t kt = scratch_[t];
      if (kt == 0) continue;
      at(r, t) -= kt;
      at(t, r) -= kt;
      at(s, t) += kt;
      at(t, s) += kt;
    }
    at(r, r) -= to_r;
    at(s, s) += to_s;
    at(r, s) += to_r - to_s;
    at(s, r) = at(r, s);
    --size_[r];
    ++size_[s];
    degree_[r] -= kv;
    degree_[s] += kv;
    assignment_[v] = s;
  }

  const Graph& graph_;
  SbmVariant variant_;
  std::int64_t nodes_;
  std::int64_t edges_;
  LogFactorial lf_;
  double degree_log_sum_ = 0.0;

  std::size_t blocks_ = 0;
  std::vector<BlockId> assignment_;
  std::vector<std::int64_t> size_;
  std::vector<std::int64_t> degree_;
  std::vector<std::int64_t> matrix_;
  std::vector<std::int64_t> scratch_;
  double total_ = 0.0;
};

struct Stage {
  std::size_t blocks;
  double length;
  std::vector<BlockId> assignment;
};

/// Chooses `count` disjoint merges in increasing order of length change.
std::vector<std::pair<BlockId, BlockId>> pick_merges(const BlockState& state, std::size_t count) {
  struct Candidate {
    double delta;
    BlockId r, s;
  };
  std::vector<Candidate> candidates;
  const auto b = static_cast<BlockId>(state.blocks());
  candidates.reserve(static_cast<std::size_t>(b) * (b - 1) / 2);
  for (BlockId r = 0; r < b; ++r) {
    for (BlockId s = r + 1; s < b; ++s) candidates.push_back({state.merge_delta(r, s), r, s});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.delta != y.delta) return x.delta < y.delta;
    return x.r != y.r ? x.r < y.r : x.s < y.s;
  });
  std::vector<bool> used(b, false);
  std::vector<std::pair<BlockId, BlockId>> merges;
  for (const auto& c : candidates) {
    if (merges.size() == count) break;
    if (used[c.r] || used[c.s]) continue;
    used[c.r] = used[c.s] = true;
    merges.emplace_back(c.r, c.s);
  }
  return merges;
}

class Fitter {
 public:
  Fitter(const Graph& graph, SbmVariant variant, std::uint64_t seed, const MdlOptions& options)
      : state_(graph, variant), options_(options), rng_(derive_seed(seed, 0x5b)) {
    order_.resize(graph.node_count());
    std::iota(order_.begin(), order_.end(), 0);
  }

  void relax(std::vector<MdlTracePoint>& trace) {
    for (int s = 0; s < options_.max_sweeps; ++s) {
      rng_.shuffle(order_);
      if (state_.sweep(order_, phase_, trace) == 0) break;
    }
    ++phase_;
    // Re-anchor the running total against accumulated rounding.
    state_.load(state_.assignment());
  }

  void record(std::vector<Stage>& stages) {
    stages.push_back({state_.blocks(), state_.total(), state_.assignment()});
  }

  /// Merges down to `target` blocks, `single` merge per step or in batches.
  void descend(std::size_t target, bool single, std::vector<Stage>& stages,
               std::vector<MdlTracePoint>& trace) {
    while (state_.blocks() > target) {
      const std::size_t b = state_.blocks();
      std::size_t next = single ? b - 1
                                : static_cast<std::size_t>(std::floor(static_cast<double>(b) /
                                                                      options_.merge_ratio));
      next = std::clamp<std::size_t>(next, target, b - 1);
      state_.merge(pick_merges(state_, b - next));
      relax(trace);
      record(stages);
    }
  }

  BlockState& state() { return state_; }

 private:
  BlockState state_;
  MdlOptions options_;
  Rng rng_;
  std::vector<NodeId> order_;
  std::size_t phase_ = 0;
};

}  // namespace

const char* variant_name(SbmVariant variant) {
  return variant == SbmVariant::kDegreeCorrected ? "DC-SBM" : "SBM";
}

std::size_t default_max_blocks(std::size_t node_count) {
  const double n = static_cast<double>(node_count);
  const auto cap = static_cast<std::size_t>(std::min(n / 4.0, 4.0 * std::sqrt(n)));
  return std::max<std::size_t>(1, cap);
}

double description_length(const Graph& graph, const Partition& partition, SbmVariant variant) {
  require(partition.node_count() == graph.node_count(), "partition size does not match graph");
  BlockState state(graph, variant);
  state.load(partition.assignment());
  return state.total() / std::numbers::ln2;
}

MdlFit fit_sbm_mdl(const Graph& graph, SbmVariant variant, std::uint64_t seed,
                   const MdlOptions& options) {
  require(graph.node_count() > 0, "cannot fit an empty graph");
  require(options.merge_ratio > 1.0, "merge ratio must exceed 1");
  MdlFit fit;
  const std::size_t n = graph.node_count();
  const std::size_t max_blocks = options.max_blocks ? options.max_blocks : default_max_blocks(n);

  // Initial grouping: greedy modularity down to max_blocks, isolated nodes
  // pooled into one block.
  auto initial = detail::agglomerate(graph, max_blocks, false);
  BlockId pool = std::numeric_limits<BlockId>::max();
  for (NodeId v = 0; v < n; ++v) {
    if (graph.degree(v) != 0) continue;
    if (pool == std::numeric_limits<BlockId>::max()) pool = initial[v];
    initial[v] = pool;
  }

  Fitter fitter(graph, variant, seed, options);
  fitter.state().load(initial);
  std::vector<Stage> stages;
  fitter.relax(fit.trace);
  fitter.record(stages);
  fitter.descend(1, false, stages, fit.trace);

  auto best_index = [&] {
    std::size_t best = 0;
    for (std::size_t i = 1; i < stages.size(); ++i) {
      if (stages[i].length < stages[best].length - 1e-9) best = i;
    }
    return best;
  };

  // Refine between the coarse neighbours of the best stage with single merges.
  const std::size_t coarse_best = best_index();
  const std::size_t upper = coarse_best > 0 ? coarse_best - 1 : coarse_best;
  const std::size_t lower_blocks =
      coarse_best + 1 < stages.size() ? stages[coarse_best + 1].blocks : stages[coarse_best].blocks;
  if (stages[upper].blocks > lower_blocks + 1) {
    const std::vector<BlockId> start = stages[upper].assignment;
    fitter.state().load(start);
    fitter.descend(lower_blocks, true, stages, fit.trace);
  }

  const std::size_t best = best_index();
  fit.partition = Partition(graph, stages[best].assignment);
  fit.bits = stages[best].length / std::numbers::ln2;
  for (const auto& s : stages) fit.by_blocks.emplace_back(s.blocks, s.length / std::numbers::ln2);
  return fit;
}

std::vector<double> score_sbm(const Graph& graph, const Partition& partition, SbmVariant variant,
                              std::span<const NodePair> pairs) {
  require(partition.node_count() == graph.node_count(), "partition size does not match graph");
  std::vector<double> out(pairs.size(), 0.0);
  for (std::size_t row = 0; row < pairs.size(); ++row) {
    const NodeId i = pairs[row].first, j = pairs[row].second;
    const BlockId r = partition.block_of(i), s = partition.block_of(j);
    const double m_rs = static_cast<double>(partition.block_edges(r, s));
    if (variant == SbmVariant::kStandard) {
      const double nr = static_cast<double>(partition.block_size(r));
      const double ns = static_cast<double>(partition.block_size(s));
      if (r == s) {
        out[row] = nr >= 2 ? m_rs / (nr * (nr - 1.0) / 2.0) : 0.0;
      } else {
        out[row] = m_rs / (nr * ns);
      }
    } else {
      const double dr = static_cast<double>(partition.block_degree(r));
      const double ds = static_cast<double>(partition.block_degree(s));
      if (dr == 0 || ds == 0) continue;
      const double omega = r == s ? 2.0 * m_rs : m_rs;
      out[row] = static_cast<double>(graph.degree(i)) / dr *
                 (static_cast<double>(graph.degree(j)) / ds) * omega;
    }
  }
  return out;
}

}  // namespace stacklp
