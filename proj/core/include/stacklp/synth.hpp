#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stacklp/graph.hpp"
#include "stacklp/partition.hpp"

namespace stacklp {

enum class DegreeFamily : std::uint8_t { kPoisson, kWeibull, kPowerLaw };

const char* degree_family_name(DegreeFamily family);
DegreeFamily parse_degree_family(const std::string& name);

/// Generative parameters of one synthetic network.
///
/// Poisson rows are ER (k = 1, edge probability `p`) or SBM (`p_in`,
/// `p_out`). Weibull and power-law rows are degree-corrected: degrees are
/// drawn from the family, edges from Poisson rates collapsed to a simple
/// graph, with `epsilon` = m_out / m_in.
struct SyntheticSpec {
  std::string name;
  std::string region;  // low, moderate, high
  DegreeFamily degree_family = DegreeFamily::kPoisson;
  std::size_t k = 1;
  std::size_t n = 0;
  double p = 0.0;
  double p_in = 0.0;
  double p_out = 0.0;
  double weibull_lambda = 1.0;
  double weibull_beta = 0.0;
  double exponent = 0.0;
  double epsilon = 0.0;
  double omega = 0.0;  // realized total rate reported for k = 1 rows; informational
  std::size_t degree_cap = 0;  // 0 = structural_degree_cap(*this)

  bool degree_corrected() const { return degree_family != DegreeFamily::kPoisson; }
  /// m_out / m_in; for Poisson SBM rows, (k - 1) p_out / p_in.
  double fuzziness() const;
  void validate() const;
};

/// The 45 parameterizations: 3 fuzziness regions x 3 degree families x
/// k in {1, 2, 4, 16, 32}.
std::vector<SyntheticSpec> builtin_suite();

/// Normalized discrete degree distribution on {1, ..., cap}.
class DegreeDistribution {
 public:
  /// Poisson(mean) conditioned on r >= 1.
  static DegreeDistribution poisson(double mean, std::size_t cap);
  /// f(r) proportional to r^(beta - 1) exp(-lambda r^beta).
  static DegreeDistribution weibull(double lambda, double beta, std::size_t cap);
  /// f(r) proportional to r^(-exponent).
  static DegreeDistribution power_law(double exponent, std::size_t cap);
  static DegreeDistribution for_spec(const SyntheticSpec& spec);

  std::size_t cap() const { return cdf_.size(); }
  double pmf(std::size_t r) const;
  double cdf(std::size_t r) const;
  double mean() const { return mean_; }
  std::uint32_t sample(double uniform) const;

 private:
  explicit DegreeDistribution(std::vector<double> weights);
  std::vector<double> cdf_;  // cdf_[r - 1] = P(R <= r)
  double mean_ = 0.0;
};

/// Largest degree r_max with r_max = ceil(sqrt(n <r>)), where <r> is the mean
/// of the family truncated at r_max (fixed point from r_max = n - 1). Keeps
/// the expected multiplicity d_i d_j / 2m of most pairs below one, so few
/// edges are lost when multi-edges collapse.
std::size_t structural_degree_cap(const SyntheticSpec& spec);

std::vector<std::uint32_t> sample_degree_sequence(const DegreeDistribution& dist, std::size_t n,
                                                  std::uint64_t seed);

/// A generated network with its planted structure.
struct PlantedGraph {
  Graph graph;
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::vector<BlockId> types;           // planted community of each node, in [0, k)
  Partition partition;                  // canonical form of `types`
  std::vector<double> target_degrees;   // degree-corrected rows; empty otherwise
  std::vector<double> type_degree;      // d_r summed over target degrees, per type
  std::vector<double> type_rate;        // k x k: p_rs (Poisson) or omega_rs
  double expected_multi_edge_fraction = 0.0;
  std::vector<std::string> warnings;

  /// Generative score of pair (i, j): the edge probability for Poisson
  /// rows, the Poisson rate (d_i / d_r)(d_j / d_s) omega_rs otherwise.
  double planted_rate(NodeId i, NodeId j) const;
};

PlantedGraph generate(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace stacklp
