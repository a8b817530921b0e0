#include "stacklp/model_features.hpp"

#include "stacklp/modularity.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

ModelFits fit_models(const Graph& graph, const ModelOptions& options) {
  ModelFits fits;
  parallel_for(4, options.workers, [&](std::size_t task) {
    const std::uint64_t seed = derive_seed(options.seed, 0x40 + task);
    switch (task) {
      case 0:
        fits.modularity = fit_modularity(graph, seed);
        break;
      case 1:
        fits.sbm = fit_sbm_mdl(graph, SbmVariant::kStandard, seed, options.mdl);
        break;
      case 2:
        fits.dcsbm = fit_sbm_mdl(graph, SbmVariant::kDegreeCorrected, seed, options.mdl);
        break;
      default:
        fits.spectral = fit_spectral_nb(graph, seed, options.spectral);
        break;
    }
  });
  return fits;
}

const std::vector<std::string>& model_column_ids() {
  static const std::vector<std::string> ids = {"Q", "MDL-SBM", "MDL-DCSBM", "S-NB"};
  return ids;
}

PairFeatureTable model_features(const Graph& graph, const ModelFits& fits,
                                std::span<const NodePair> pairs) {
  std::vector<ColumnInfo> columns;
  for (const auto& id : model_column_ids()) columns.push_back({id, Family::kModel});
  PairFeatureTable table({pairs.begin(), pairs.end()}, columns);
  table.set_column(0, score_modularity(graph, fits.modularity, pairs));
  table.set_column(1, score_sbm(graph, fits.sbm.partition, SbmVariant::kStandard, pairs));
  table.set_column(2, score_sbm(graph, fits.dcsbm.partition, SbmVariant::kDegreeCorrected, pairs));
  table.set_column(3,
                   score_sbm(graph, fits.spectral.partition, SbmVariant::kDegreeCorrected, pairs));
  return table;
}

PairFeatureTable model_features(const Graph& graph, std::span<const NodePair> pairs,
                                const ModelOptions& options) {
  return model_features(graph, fit_models(graph, options), pairs);
}

}  // namespace stacklp
