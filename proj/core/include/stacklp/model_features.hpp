#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stacklp/feature_table.hpp"
#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"
#include "stacklp/sbm_mdl.hpp"
#include "stacklp/spectral_nb.hpp"

namespace stacklp {

struct ModelOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  MdlOptions mdl;
  SpectralOptions spectral;
};

/// The four fitted community models of one graph.
struct ModelFits {
  Partition modularity;
  MdlFit sbm;
  MdlFit dcsbm;
  SpectralFit spectral;
};

/// Fits Q, MDL(SBM), MDL(DC-SBM) and S-NB; the four fits run concurrently
/// when workers > 1, each with its own seed stream.
ModelFits fit_models(const Graph& graph, const ModelOptions& options = {});

/// Column ids: Q, MDL-SBM, MDL-DCSBM, S-NB.
const std::vector<std::string>& model_column_ids();

/// Q scores are the modularity gain of adding the pair, the MDL columns are
/// the block-model plug-in rates, and S-NB is scored with the degree-corrected
/// rate of its spectral partition.
PairFeatureTable model_features(const Graph& graph, const ModelFits& fits,
                                std::span<const NodePair> pairs);

PairFeatureTable model_features(const Graph& graph, std::span<const NodePair> pairs,
                                const ModelOptions& options = {});

}  // namespace stacklp
