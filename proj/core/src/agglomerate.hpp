#pragma once

// Greedy modularity agglomeration shared by the modularity fit and the
// block-model initialization.

#include <cstddef>
#include <vector>

#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"

namespace stacklp::detail {

/// Starts from singletons and repeatedly merges the adjacent pair with the
/// largest modularity gain. Stops when no adjacent pairs remain, when the
/// community count reaches `min_blocks`, or (when `positive_only`) when the
/// best gain is not positive. Ties go to the lexicographically lowest pair.
std::vector<BlockId> agglomerate(const Graph& graph, std::size_t min_blocks, bool positive_only);

}  // namespace stacklp::detail
