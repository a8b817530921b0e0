#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"

namespace stacklp {

enum class SbmVariant : std::uint8_t { kStandard, kDegreeCorrected };

const char* variant_name(SbmVariant variant);

/// Description length in bits: microcanonical block-model entropy plus the
/// encoding of the block count, partition, edge counts and (degree-corrected
/// variant) the degree sequence within each block.
double description_length(const Graph& graph, const Partition& partition, SbmVariant variant);

/// Largest block count searched: min(n/4, 4 sqrt(n)), at least 1.
std::size_t default_max_blocks(std::size_t node_count);

struct MdlOptions {
  std::size_t max_blocks = 0;  // 0 = default_max_blocks(n)
  double merge_ratio = 1.3;    // block count shrink factor per coarse stage
  int max_sweeps = 4;          // node-move sweeps after each merge stage
};

/// Description length after an accepted node move. Within one phase
/// (between two merge steps) the values strictly decrease.
struct MdlTracePoint {
  std::size_t phase = 0;
  std::size_t blocks = 0;
  double bits = 0.0;
};

struct MdlFit {
  Partition partition;
  double bits = 0.0;
  std::vector<MdlTracePoint> trace;
  /// (block count, description length) at the end of every visited stage.
  std::vector<std::pair<std::size_t, double>> by_blocks;
};

/// Agglomerative minimization: modularity-greedy initialization to at most
/// max_blocks groups, then block merges chosen by exact description-length
/// change interleaved with single-node move sweeps, keeping the best block
/// count seen. Deterministic given the seed.
MdlFit fit_sbm_mdl(const Graph& graph, SbmVariant variant, std::uint64_t seed,
                   const MdlOptions& options = {});

/// Plug-in edge rates. Standard: m_rs / (n_r n_s), or m_rr / C(n_r, 2)
/// within a block (0 for singleton blocks). Degree-corrected:
/// (d_i / d_r)(d_j / d_s) w_rs with w_rr = 2 m_rr and w_rs = m_rs.
std::vector<double> score_sbm(const Graph& graph, const Partition& partition, SbmVariant variant,
                              std::span<const NodePair> pairs);

}  // namespace stacklp
