#include "stacklp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stacklp/error.hpp"
#include "stacklp/rng.hpp"

namespace stacklp {

namespace {

constexpr double kMultiEdgeWarning = 0.20;

SyntheticSpec poisson_row(const char* region, std::size_t k, std::size_t n, double p_in,
                          double p_out = 0.0) {
  SyntheticSpec s;
  s.region = region;
  s.degree_family = DegreeFamily::kPoisson;
  s.k = k;
  s.n = n;
  if (k == 1) {
    s.p = p_in;
  } else {
    s.p_in = p_in;
    s.p_out = p_out;
    s.epsilon = s.fuzziness();
  }
  return s;
}

SyntheticSpec weibull_row(const char* region, std::size_t k, std::size_t n, double beta,
                          double epsilon, double omega = 0.0) {
  SyntheticSpec s;
  s.region = region;
  s.degree_family = DegreeFamily::kWeibull;
  s.k = k;
  s.n = n;
  s.weibull_lambda = 1.0;
  s.weibull_beta = beta;
  s.epsilon = epsilon;
  s.omega = omega;
  return s;
}

SyntheticSpec power_row(const char* region, std::size_t k, std::size_t n, double exponent,
                        double epsilon, double omega = 0.0) {
  SyntheticSpec s;
  s.region = region;
  s.degree_family = DegreeFamily::kPowerLaw;
  s.k = k;
  s.n = n;
  s.exponent = exponent;
  s.epsilon = epsilon;
  s.omega = omega;
  return s;
}

std::vector<double> normalized_log_weights(std::vector<double> log_w) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  for (double& w : log_w) w = std::exp(w - top);
  return log_w;
}

}  // namespace

const char* degree_family_name(DegreeFamily family) {
  switch (family) {
    case DegreeFamily::kPoisson:
      return "poisson";
    case DegreeFamily::kWeibull:
      return "weibull";
    case DegreeFamily::kPowerLaw:
      return "powerlaw";
  }
  return "?";
}

DegreeFamily parse_degree_family(const std::string& name) {
  if (name == "poisson") return DegreeFamily::kPoisson;
  if (name == "weibull") return DegreeFamily::kWeibull;
  if (name == "powerlaw" || name == "power-law" || name == "power_law") {
    return DegreeFamily::kPowerLaw;
  }
  fail(ErrorCategory::kInvalidArgument, "unknown degree family '" + name + "'");
}

double SyntheticSpec::fuzziness() const {
  if (degree_family == DegreeFamily::kPoisson) {
    if (k <= 1 || p_in <= 0.0) return 0.0;
    return static_cast<double>(k - 1) * p_out / p_in;
  }
  return epsilon;
}

void SyntheticSpec::validate() const {
  require(n >= 2, "spec '" + name + "': n must be at least 2");
  require(k >= 1 && k <= n, "spec '" + name + "': k must be in [1, n]");
  auto probability = [](double x) { return x >= 0.0 && x <= 1.0; };
  switch (degree_family) {
    case DegreeFamily::kPoisson:
      if (k == 1) {
        require(probability(p), "spec '" + name + "': p must be in [0, 1]");
      } else {
        require(probability(p_in) && probability(p_out),
                "spec '" + name + "': p_in and p_out must be in [0, 1]");
      }
      break;
    case DegreeFamily::kWeibull:
      require(weibull_beta > 0.0 && weibull_lambda > 0.0,
              "spec '" + name + "': Weibull lambda and beta must be positive");
      break;
    case DegreeFamily::kPowerLaw:
      require(exponent > 0.0, "spec '" + name + "': power-law exponent must be positive");
      break;
  }
  require(epsilon >= 0.0, "spec '" + name + "': epsilon must be non-negative");
}

std::vector<SyntheticSpec> builtin_suite() {
  std::vector<SyntheticSpec> rows = {
      poisson_row("low", 1, 505, 0.008),
      poisson_row("low", 2, 512, 0.03, 0.0003),
      poisson_row("low", 4, 512, 0.06, 0.0003),
      poisson_row("low", 16, 512, 0.25, 0.0003),
      poisson_row("low", 32, 512, 0.49, 0.0003),
      weibull_row("low", 1, 497, 0.5, 0.0, 2350),
      weibull_row("low", 2, 520, 0.4, 0.002),
      weibull_row("low", 4, 604, 0.4, 0.002),
      weibull_row("low", 16, 773, 0.4, 0.04),
      weibull_row("low", 32, 939, 0.15, 0.0005),
      power_row("low", 1, 507, 1.6, 0.0, 5436),
      power_row("low", 2, 511, 1.7, 0.0003),
      power_row("low", 4, 511, 1.8, 0.002),
      power_row("low", 16, 983, 1.6, 0.0015),
      power_row("low", 32, 1029, 1.41, 0.0015),
      poisson_row("moderate", 1, 511, 0.016),
      poisson_row("moderate", 2, 512, 0.03, 0.005),
      poisson_row("moderate", 4, 512, 0.04, 0.006),
      poisson_row("moderate", 16, 512, 0.16, 0.006),
      poisson_row("moderate", 32, 511, 0.31, 0.006),
      weibull_row("moderate", 1, 510, 0.7, 0.0, 1424),
      weibull_row("moderate", 2, 501, 0.4, 0.06),
      weibull_row("moderate", 4, 593, 0.4, 0.08),
      weibull_row("moderate", 16, 589, 0.4, 0.2),
      weibull_row("moderate", 32, 640, 0.22, 0.05),
      power_row("moderate", 1, 545, 1.9, 0.0, 1428),
      power_row("moderate", 2, 506, 1.7, 0.05),
      power_row("moderate", 4, 540, 1.8, 0.05),
      power_row("moderate", 16, 655, 1.7, 0.01),
      power_row("moderate", 32, 702, 1.41, 0.01),
      poisson_row("high", 1, 512, 0.03),
      poisson_row("high", 2, 512, 0.025, 0.006),
      poisson_row("high", 4, 512, 0.04, 0.007),
      poisson_row("high", 16, 512, 0.14, 0.007),
      poisson_row("high", 32, 512, 0.27, 0.007),
      weibull_row("high", 1, 489, 0.9, 0.0, 1216),
      weibull_row("high", 2, 506, 0.4, 0.2),
      weibull_row("high", 4, 590, 0.4, 0.32),
      weibull_row("high", 16, 600, 0.4, 0.5),
      weibull_row("high", 32, 631, 0.22, 0.13),
      power_row("high", 1, 514, 2.2, 0.0, 1722),
      power_row("high", 2, 536, 1.7, 0.08),
      power_row("high", 4, 526, 1.8, 0.14),
      power_row("high", 16, 626, 1.7, 0.1),
      power_row("high", 32, 673, 1.5, 0.05),
  };
  for (auto& r : rows) {
    r.name = r.region + "-" + degree_family_name(r.degree_family) + "-k" + std::to_string(r.k);
  }
  return rows;
}

DegreeDistribution::DegreeDistribution(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    fail(ErrorCategory::kInvalidArgument, "degree distribution is not normalizable");
  }
  cdf_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / total;
    mean_ += static_cast<double>(i + 1) * weights[i] / total;
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
}

DegreeDistribution DegreeDistribution::poisson(double mean, std::size_t cap) {
  require(mean > 0.0 && cap >= 1, "Poisson degree distribution needs mean > 0");
  std::vector<double> log_w(cap);
  for (std::size_t r = 1; r <= cap; ++r) {
    const double x = static_cast<double>(r);
    log_w[r - 1] = x * std::log(mean) - std::lgamma(x + 1.0);
  }
  return DegreeDistribution(normalized_log_weights(std::move(log_w)));
}

DegreeDistribution DegreeDistribution::weibull(double lambda, double beta, std::size_t cap) {
  require(lambda > 0.0 && beta > 0.0 && cap >= 1, "Weibull parameters must be positive");
  std::vector<double> log_w(cap);
  for (std::size_t r = 1; r <= cap; ++r) {
    const double x = static_cast<double>(r);
    log_w[r - 1] = (beta - 1.0) * std::log(x) - lambda * std::pow(x, beta);
  }
  return DegreeDistribution(normalized_log_weights(std::move(log_w)));
}

DegreeDistribution DegreeDistribution::power_law(double exponent, std::size_t cap) {
  require(exponent > 0.0 && cap >= 1, "power-law exponent must be positive");
  std::vector<double> log_w(cap);
  for (std::size_t r = 1; r <= cap; ++r) log_w[r - 1] = -exponent * std::log(static_cast<double>(r));
  return DegreeDistribution(normalized_log_weights(std::move(log_w)));
}

namespace {

DegreeDistribution family_distribution(const SyntheticSpec& spec, std::size_t cap) {
  switch (spec.degree_family) {
    case DegreeFamily::kWeibull:
      return DegreeDistribution::weibull(spec.weibull_lambda, spec.weibull_beta, cap);
    case DegreeFamily::kPowerLaw:
      return DegreeDistribution::power_law(spec.exponent, cap);
    case DegreeFamily::kPoisson:
      break;
  }
  const double p = spec.k == 1 ? spec.p : (spec.p_in + spec.p_out * (spec.k - 1)) / spec.k;
  return DegreeDistribution::poisson(p * static_cast<double>(spec.n - 1), cap);
}

}  // namespace

std::size_t structural_degree_cap(const SyntheticSpec& spec) {
  require(spec.n >= 2, "structural degree cap needs at least two nodes");
  std::size_t cap = spec.n - 1;
  // The mean grows with the cap, so the iteration decreases monotonically.
  for (int iter = 0; iter < 200; ++iter) {
    const double mean = family_distribution(spec, cap).mean();
    const auto next = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.n) * mean))), 1,
        spec.n - 1);
    if (next >= cap) break;
    cap = next;
  }
  return cap;
}

DegreeDistribution DegreeDistribution::for_spec(const SyntheticSpec& spec) {
  return family_distribution(spec, spec.degree_cap ? spec.degree_cap : structural_degree_cap(spec));
}

double DegreeDistribution::pmf(std::size_t r) const {
  if (r < 1 || r > cdf_.size()) return 0.0;
  return r == 1 ? cdf_[0] : cdf_[r - 1] - cdf_[r - 2];
}

double DegreeDistribution::cdf(std::size_t r) const {
  if (r < 1) return 0.0;
  return r >= cdf_.size() ? 1.0 : cdf_[r - 1];
}

std::uint32_t DegreeDistribution::sample(double uniform) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), uniform);
  const auto index = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  return static_cast<std::uint32_t>(index + 1);
}

std::vector<std::uint32_t> sample_degree_sequence(const DegreeDistribution& dist, std::size_t n,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> out(n);
  for (auto& d : out) d = dist.sample(rng.uniform());
  return out;
}

double PlantedGraph::planted_rate(NodeId i, NodeId j) const {
  const BlockId r = types[i], s = types[j];
  const double rate = type_rate[r * spec.k + s];
  if (target_degrees.empty()) return rate;
  return target_degrees[i] / type_degree[r] * (target_degrees[j] / type_degree[s]) * rate;
}

PlantedGraph generate(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  PlantedGraph out;
  out.spec = spec;
  out.seed = seed;
  const std::size_t n = spec.n, k = spec.k;

  Rng type_rng(derive_seed(seed, 2));
  out.types.resize(n);
  for (auto& t : out.types) t = k == 1 ? 0 : static_cast<BlockId>(type_rng.below(k));

  out.type_rate.assign(k * k, 0.0);
  if (!spec.degree_corrected()) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        out.type_rate[r * k + s] = k == 1 ? spec.p : (r == s ? spec.p_in : spec.p_out);
      }
    }
  } else {
    const auto degrees =
        sample_degree_sequence(DegreeDistribution::for_spec(spec), n, derive_seed(seed, 1));
    out.target_degrees.assign(degrees.begin(), degrees.end());
    out.type_degree.assign(k, 0.0);
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      out.type_degree[out.types[v]] += out.target_degrees[v];
      total += out.target_degrees[v];
    }
    const double m = total / 2.0;
    const double m_in = m / (1.0 + spec.epsilon);
    const double m_out = spec.epsilon * m_in;
    const double kd = static_cast<double>(k);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        if (k == 1) {
          out.type_rate[0] = 2.0 * m;
        } else {
          out.type_rate[r * k + s] = r == s ? 2.0 * m_in / kd : m_out / (kd * (kd - 1.0) / 2.0);
        }
      }
    }
  }

  Rng edge_rng(derive_seed(seed, 3));
  std::vector<NodePair> edges;
  double rate_sum = 0.0, collapsed_sum = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double u = edge_rng.uniform();
      if (!spec.degree_corrected()) {
        if (u < out.planted_rate(i, j)) edges.emplace_back(i, j);
        continue;
      }
      const double rate = out.planted_rate(i, j);
      const double p = -std::expm1(-rate);
      rate_sum += rate;
      collapsed_sum += p;
      if (u < p) edges.emplace_back(i, j);
    }
  }
  if (rate_sum > 0.0) {
    out.expected_multi_edge_fraction = 1.0 - collapsed_sum / rate_sum;
    if (out.expected_multi_edge_fraction > kMultiEdgeWarning) {
      std::ostringstream msg;
      msg << "expected multi-edge fraction " << out.expected_multi_edge_fraction
          << " exceeds 0.2; collapsing distorts the degree sequence";
      out.warnings.push_back(msg.str());
    }
  }
  out.graph = Graph::from_pairs(n, edges);
  out.partition = Partition(out.graph, out.types);
  return out;
}

}  // namespace stacklp
