#include "stacklp/feature_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "stacklp/error.hpp"

namespace stacklp {

const char* family_name(Family f) {
  switch (f) {
    case Family::kTopological: return "topological";
    case Family::kModel: return "model";
    case Family::kEmbedding: return "embedding";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "T" || name == "topological" || name == "topol") return Family::kTopological;
  if (name == "M" || name == "model") return Family::kModel;
  if (name == "E" || name == "embedding" || name == "embed") return Family::kEmbedding;
  fail(ErrorCategory::kInvalidArgument, "unknown predictor family '" + name + "'");
}

FamilyMask::FamilyMask(std::initializer_list<Family> families) {
  for (Family f : families) insert(f);
}

std::string FamilyMask::to_string() const {
  std::string out;
  const std::pair<Family, char> names[] = {
      {Family::kTopological, 'T'}, {Family::kModel, 'M'}, {Family::kEmbedding, 'E'}};
  for (auto [f, c] : names) {
    if (!contains(f)) continue;
    if (!out.empty()) out += '+';
    out += c;
  }
  return out;
}

FamilyMask FamilyMask::parse(const std::string& text) {
  FamilyMask mask;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of("+,", start);
    if (end == std::string::npos) end = text.size();
    if (end > start) mask.insert(parse_family(text.substr(start, end - start)));
    start = end + 1;
  }
  if (mask.empty()) fail(ErrorCategory::kInvalidArgument, "empty family mask '" + text + "'");
  return mask;
}

std::vector<FamilyMask> FamilyMask::presets() {
  using F = Family;
  return {{F::kTopological},          {F::kModel},
          {F::kEmbedding},            {F::kTopological, F::kModel},
          {F::kTopological, F::kEmbedding}, {F::kModel, F::kEmbedding},
          {F::kTopological, F::kModel, F::kEmbedding}};
}

PairFeatureTable::PairFeatureTable(std::vector<NodePair> pairs, std::vector<ColumnInfo> columns)
    : pairs_(std::move(pairs)), columns_(std::move(columns)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.id).second) {
      fail(ErrorCategory::kInvalidArgument, "duplicate column id '" + c.id + "'");
    }
  }
  values_.assign(pairs_.size() * columns_.size(), 0.0);
}

std::vector<double> PairFeatureTable::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

void PairFeatureTable::set_column(std::size_t c, std::span<const double> values) {
  require(values.size() == rows(), "set_column: length mismatch");
  for (std::size_t r = 0; r < rows(); ++r) at(r, c) = values[r];
}

std::ptrdiff_t PairFeatureTable::find(const std::string& id) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].id == id) return static_cast<std::ptrdiff_t>(c);
  }
  return -1;
}

std::vector<std::size_t> PairFeatureTable::columns_in(const FamilyMask& mask) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (mask.contains(columns_[c].family)) out.push_back(c);
  }
  return out;
}

PairFeatureTable PairFeatureTable::select_columns(std::span<const std::size_t> cols) const {
  std::vector<ColumnInfo> info;
  for (std::size_t c : cols) info.push_back(columns_.at(c));
  PairFeatureTable out(pairs_, std::move(info));
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) out.at(r, k) = at(r, cols[k]);
  }
  return out;
}

PairFeatureTable PairFeatureTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<NodePair> pairs;
  pairs.reserve(rows.size());
  for (std::size_t r : rows) pairs.push_back(pairs_.at(r));
  PairFeatureTable out(std::move(pairs), columns_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(rows[k] * cols()), cols(),
                out.values_.begin() + static_cast<std::ptrdiff_t>(k * cols()));
  }
  return out;
}

PairFeatureTable PairFeatureTable::hconcat(std::span<const PairFeatureTable> parts) {
  if (parts.empty()) return {};
  std::vector<ColumnInfo> cols;
  for (const auto& p : parts) {
    if (p.pairs_ != parts[0].pairs_) {
      fail(ErrorCategory::kInvalidArgument, "hconcat: tables cover different pairs");
    }
    cols.insert(cols.end(), p.columns_.begin(), p.columns_.end());
  }
  PairFeatureTable out(parts[0].pairs_, std::move(cols));
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      std::copy_n(p.values_.begin() + static_cast<std::ptrdiff_t>(r * p.cols()), p.cols(),
                  out.values_.begin() + static_cast<std::ptrdiff_t>(r * out.cols() + offset));
    }
    offset += p.cols();
  }
  return out;
}

void PairFeatureTable::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorCategory::kInternal, "non-finite value in column '" +
                                         columns_[i % cols()].id + "' at row " +
                                         std::to_string(i / cols()));
    }
  }
}

void PairFeatureTable::write_csv(std::ostream& out, const Graph* graph) const {
  out << "src,dst";
  for (const auto& c : columns_) out << ',' << c.id;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows(); ++r) {
    const auto& p = pairs_[r];
    if (graph) {
      out << graph->label(p.first) << ',' << graph->label(p.second);
    } else {
      out << p.first << ',' << p.second;
    }
    for (std::size_t c = 0; c < cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", at(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace {

constexpr char kMagic[8] = {'S', 'L', 'P', 'F', 'T', 'A', 'B', '\0'};

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) fail(ErrorCategory::kIo, "feature cache truncated");
  return value;
}

}  // namespace

void PairFeatureTable::write_binary(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kBinaryVersion);
  put<std::uint64_t>(out, rows());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cols()));
  for (const auto& c : columns_) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(c.family));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.id.size()));
    out.write(c.id.data(), static_cast<std::streamsize>(c.id.size()));
  }
  for (const auto& p : pairs_) {
    put<std::uint32_t>(out, p.first);
    put<std::uint32_t>(out, p.second);
  }
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

PairFeatureTable PairFeatureTable::read_binary(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCategory::kIo, "not a feature cache (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kBinaryVersion) {
    fail(ErrorCategory::kIo, "feature cache version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kBinaryVersion) +
                                 ")");
  }
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint32_t>(in);
  std::vector<ColumnInfo> info(cols);
  for (auto& c : info) {
    const auto fam = get<std::uint8_t>(in);
    if (fam > 2) fail(ErrorCategory::kIo, "feature cache: bad family tag");
    c.family = static_cast<Family>(fam);
    c.id.resize(get<std::uint32_t>(in));
    in.read(c.id.data(), static_cast<std::streamsize>(c.id.size()));
  }
  std::vector<NodePair> pairs(rows);
  for (auto& p : pairs) {
    const auto a = get<std::uint32_t>(in);
    const auto b = get<std::uint32_t>(in);
    p = NodePair(a, b);
  }
  PairFeatureTable table(std::move(pairs), std::move(info));
  in.read(reinterpret_cast<char*>(table.values_.data()),
          static_cast<std::streamsize>(table.values_.size() * sizeof(double)));
  if (!in) fail(ErrorCategory::kIo, "feature cache truncated");
  return table;
}

}  // namespace stacklp
