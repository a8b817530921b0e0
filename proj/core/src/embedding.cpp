#include "stacklp/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include "stacklp/error.hpp"
#include "stacklp/parallel.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

constexpr double kNoisePower = 0.75;
constexpr double kMinRateFraction = 1e-4;
constexpr std::size_t kHogwildChunks = 64;

/// -log(sigmoid(x)) without overflow.
double neg_log_sigmoid(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Plain or relaxed-atomic access to the shared parameter arrays.
template <bool Shared>
struct Access {
  static double load(const double& x) {
    if constexpr (Shared) {
      return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void add(double& x, double delta) {
    if constexpr (Shared) {
      std::atomic_ref<double> ref(x);
      ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
    } else {
      x += delta;
    }
  }
};

class SkipGram {
 public:
  SkipGram(std::size_t nodes, const EmbeddingParams& params,
           const std::vector<std::vector<NodeId>>& corpus, Rng& init_rng)
      : params_(params), corpus_(corpus), input_(nodes * params.dims), output_(nodes * params.dims, 0.0) {
    const double scale = 0.5 / static_cast<double>(params.dims);
    for (double& x : input_) x = (2.0 * init_rng.uniform() - 1.0) * scale;

    std::vector<double> counts(nodes, 0.0);
    offsets_.reserve(corpus.size() + 1);
    offsets_.push_back(0);
    for (const auto& walk : corpus) {
      for (NodeId v : walk) counts[v] += 1.0;
      offsets_.push_back(offsets_.back() + walk.size());
    }
    noise_cdf_.resize(nodes);
    double acc = 0.0;
    for (std::size_t v = 0; v < nodes; ++v) {
      acc += std::pow(counts[v], kNoisePower);
      noise_cdf_[v] = acc;
    }
    for (double& c : noise_cdf_) c /= acc;
    total_steps_ = static_cast<double>(offsets_.back() * params.epochs);
  }

  /// Trains on walks [begin, end) for one epoch. Returns (loss sum, pairs).
  template <bool Shared>
  std::pair<double, std::size_t> train(std::size_t epoch, std::size_t begin, std::size_t end,
                                       Rng& rng) {
    const std::size_t d = params_.dims;
    const auto window = static_cast<std::ptrdiff_t>(params_.window);
    std::vector<double> grad(d);
    double loss = 0.0;
    std::size_t pairs = 0;
    for (std::size_t w = begin; w < end; ++w) {
      const auto& walk = corpus_[w];
      const auto len = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t p = 0; p < len; ++p) {
        const double step =
            static_cast<double>(epoch * offsets_.back() + offsets_[w] + static_cast<std::size_t>(p));
        const double rate =
            params_.learning_rate * std::max(kMinRateFraction, 1.0 - step / total_steps_);
        double* center = &input_[walk[p] * d];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, p - window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, p + window);
        for (std::ptrdiff_t q = lo; q <= hi; ++q) {
          if (q == p) continue;
          std::fill(grad.begin(), grad.end(), 0.0);
          const NodeId positive = walk[q];
          loss += update<Shared>(center, positive, 1.0, rate, grad);
          for (std::size_t k = 0; k < params_.negatives; ++k) {
            const NodeId negative = draw_noise(rng);
            if (negative == positive) continue;
            loss += update<Shared>(center, negative, 0.0, rate, grad);
          }
          for (std::size_t c = 0; c < d; ++c) Access<Shared>::add(center[c], grad[c]);
          ++pairs;
        }
      }
    }
    return {loss, pairs};
  }

  std::vector<double>& input() { return input_; }
  const std::vector<double>& output() const { return output_; }

 private:
  template <bool Shared>
  double update(const double* center, NodeId target, double label, double rate,
                std::vector<double>& grad) {
    const std::size_t d = params_.dims;
    double* out = &output_[target * d];
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += Access<Shared>::load(center[c]) * Access<Shared>::load(out[c]);
    const double g = (label - sigmoid(dot)) * rate;
    for (std::size_t c = 0; c < d; ++c) {
      const double o = Access<Shared>::load(out[c]);
      grad[c] += g * o;
      Access<Shared>::add(out[c], g * Access<Shared>::load(center[c]));
    }
    return neg_log_sigmoid(label > 0.5 ? dot : -dot);
  }

  NodeId draw_noise(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
    return static_cast<NodeId>(std::min<std::size_t>(it - noise_cdf_.begin(), noise_cdf_.size() - 1));
  }

  const EmbeddingParams& params_;
  const std::vector<std::vector<NodeId>>& corpus_;
  std::vector<double> input_;
  std::vector<double> output_;
  std::vector<std::size_t> offsets_;
  std::vector<double> noise_cdf_;
  double total_steps_ = 1.0;
};

}  // namespace

void Embedding::write_csv(std::ostream& out, const Graph* graph) const {
  out << "node";
  for (std::size_t c = 0; c < dims; ++c) out << ",v" << c;
  out << '\n';
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (NodeId v = 0; v < node_count(); ++v) {
    if (graph) {
      out << graph->label(v);
    } else {
      out << v;
    }
    for (double x : row(v)) out << ',' << x;
    out << '\n';
  }
  out.precision(precision);
}

std::vector<std::vector<NodeId>> random_walks(const Graph& graph, std::size_t walks_per_node,
                                              std::size_t walk_length, std::uint64_t seed,
                                              int workers) {
  std::vector<NodeId> starts;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (graph.degree(v) > 0) starts.push_back(v);
  }
  std::vector<std::vector<NodeId>> walks(starts.size() * walks_per_node);
  if (walks.empty() || walk_length == 0) return walks;
  parallel_for(walks.size(), workers, [&](std::size_t w) {
    Rng rng(derive_seed(seed, w));
    auto& walk = walks[w];
    walk.reserve(walk_length);
    NodeId current = starts[w % starts.size()];
    walk.push_back(current);
    while (walk.size() < walk_length) {
      const auto nb = graph.neighbors(current);
      current = nb[rng.below(nb.size())];
      walk.push_back(current);
    }
  });
  return walks;
}

Embedding deepwalk_embed(const Graph& graph, const EmbeddingParams& params, std::uint64_t seed) {
  require(params.dims >= 2, "embedding dimension must be at least 2");
  require(params.walk_length >= 1 && params.epochs >= 1, "walk length and epochs must be positive");
  require(params.learning_rate > 0.0, "learning rate must be positive");
  const std::size_t n = graph.node_count();

  const auto corpus =
      random_walks(graph, params.walks_per_node, params.walk_length, derive_seed(seed, 0xe0), params.workers);
  Rng init_rng(derive_seed(seed, 0xe1));
  SkipGram model(n, params, corpus, init_rng);

  Embedding emb;
  emb.dims = params.dims;
  emb.params = params;
  emb.seed = seed;
  emb.deterministic = !params.hogwild || params.workers <= 1;

  Rng train_rng(derive_seed(seed, 0xe2));
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    if (emb.deterministic) {
      std::tie(loss, pairs) = model.train<false>(epoch, 0, corpus.size(), train_rng);
    } else {
      const std::size_t chunks = std::min(kHogwildChunks, std::max<std::size_t>(1, corpus.size()));
      std::vector<std::pair<double, std::size_t>> parts(chunks);
      parallel_for(chunks, params.workers, [&](std::size_t c) {
        Rng rng(derive_seed(seed, 0xe100 + epoch * chunks + c));
        const std::size_t begin = corpus.size() * c / chunks;
        const std::size_t end = corpus.size() * (c + 1) / chunks;
        parts[c] = model.train<true>(epoch, begin, end, rng);
      });
      for (const auto& [l, p] : parts) {
        loss += l;
        pairs += p;
      }
    }
    emb.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }

  emb.vectors = std::move(model.input());
  for (NodeId v = 0; v < n; ++v) {
    if (graph.degree(v) == 0) std::fill_n(emb.vectors.begin() + v * params.dims, params.dims, 0.0);
  }
  return emb;
}

std::vector<std::string> embedding_column_ids(std::size_t dims) {
  std::vector<std::string> ids;
  ids.reserve(dims + 3);
  for (std::size_t c = 0; c < dims; ++c) ids.push_back("EMB_H" + std::to_string(c));
  ids.insert(ids.end(), {"EMB_DOT", "EMB_SIGDOT", "EMB_NEGDIST"});
  return ids;
}

PairFeatureTable pair_embed_features(const Embedding& embedding, std::span<const NodePair> pairs) {
  const std::size_t d = embedding.dims;
  std::vector<ColumnInfo> columns;
  for (auto& id : embedding_column_ids(d)) columns.push_back({std::move(id), Family::kEmbedding});
  PairFeatureTable table(std::vector<NodePair>(pairs.begin(), pairs.end()), std::move(columns));
  const double lowest = std::numeric_limits<double>::min();
  const double highest = std::nextafter(1.0, 0.0);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    require(pairs[r].second < embedding.node_count(), "pair references a node outside the embedding");
    const auto u = embedding.row(pairs[r].first);
    const auto v = embedding.row(pairs[r].second);
    double dot = 0.0, dist2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double h = u[c] * v[c];
      table.at(r, c) = h;
      dot += h;
      dist2 += (u[c] - v[c]) * (u[c] - v[c]);
    }
    table.at(r, d) = dot;
    table.at(r, d + 1) = std::clamp(sigmoid(dot), lowest, highest);
    table.at(r, d + 2) = -std::sqrt(dist2);
  }
  return table;
}

}  // namespace stacklp
