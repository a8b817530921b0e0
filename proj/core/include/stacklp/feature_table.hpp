#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stacklp/graph.hpp"

namespace stacklp {

enum class Family : std::uint8_t { kTopological = 0, kModel = 1, kEmbedding = 2 };

const char* family_name(Family f);
Family parse_family(const std::string& name);

/// Set of predictor families, e.g. {topological, model}.
class FamilyMask {
 public:
  FamilyMask() = default;
  FamilyMask(std::initializer_list<Family> families);

  bool contains(Family f) const { return bits_ & bit(f); }
  void insert(Family f) { bits_ |= bit(f); }
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }

  /// "T", "M", "E" joined with '+', e.g. "T+M". Parses the same form and
  /// the long names ("topological+model").
  std::string to_string() const;
  static FamilyMask parse(const std::string& text);

  /// The seven stack presets {T}, {M}, {E}, {T,M}, {T,E}, {M,E}, {T,M,E}.
  static std::vector<FamilyMask> presets();

  friend bool operator==(const FamilyMask&, const FamilyMask&) = default;

 private:
  static std::uint8_t bit(Family f) { return static_cast<std::uint8_t>(1u << static_cast<int>(f)); }
  std::uint8_t bits_ = 0;
};

struct ColumnInfo {
  std::string id;
  Family family = Family::kTopological;

  friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

/// Rows are candidate pairs, columns are predictor scores (row-major).
/// Every score is oriented so that larger means "more likely missing".
class PairFeatureTable {
 public:
  PairFeatureTable() = default;
  PairFeatureTable(std::vector<NodePair> pairs, std::vector<ColumnInfo> columns);

  std::size_t rows() const { return pairs_.size(); }
  std::size_t cols() const { return columns_.size(); }

  const std::vector<NodePair>& pairs() const { return pairs_; }
  const std::vector<ColumnInfo>& columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  /// Index of a column id, or -1.
  std::ptrdiff_t find(const std::string& id) const;
  std::vector<std::size_t> columns_in(const FamilyMask& mask) const;

  PairFeatureTable select_columns(std::span<const std::size_t> cols) const;
  PairFeatureTable select_rows(std::span<const std::size_t> rows) const;

  /// Horizontal concatenation; pairs must match row for row and column ids
  /// must stay unique.
  static PairFeatureTable hconcat(std::span<const PairFeatureTable> parts);

  /// Throws when any value is NaN or infinite.
  void check_finite() const;

  /// CSV with header `src,dst,<ids...>`; node labels from `graph` when given.
  void write_csv(std::ostream& out, const Graph* graph = nullptr) const;

  /// Compact binary cache (little-endian, version-tagged).
  void write_binary(std::ostream& out) const;
  static PairFeatureTable read_binary(std::istream& in);

  static constexpr std::uint32_t kBinaryVersion = 1;

  friend bool operator==(const PairFeatureTable&, const PairFeatureTable&) = default;

 private:
  std::vector<NodePair> pairs_;
  std::vector<ColumnInfo> columns_;
  std::vector<double> values_;
};

}  // namespace stacklp
