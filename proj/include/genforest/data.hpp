#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace genforest {

enum class FeatureKind { Categorical, Integer, Real };

std::string_view to_string(FeatureKind kind);

/// Learned value domain of one feature. Categorical values are stored as the
/// index of their modality; numeric domains are the closed interval [lo, hi].
struct FeatureDomain {
  FeatureKind kind = FeatureKind::Real;
  std::vector<std::string> modalities;
  double lo = 0.0;
  double hi = 0.0;

  bool is_categorical() const { return kind == FeatureKind::Categorical; }
  bool is_numeric() const { return kind != FeatureKind::Categorical; }
  std::size_t cardinality() const { return modalities.size(); }

  /// True if a non-missing stored value belongs to the domain.
  bool contains(double value) const;

  /// Index of `name` in the modality list, if present.
  std::optional<std::size_t> modality_index(std::string_view name) const;

  bool operator==(const FeatureDomain&) const = default;
};

struct Feature {
  std::string name;
  FeatureDomain domain;

  bool operator==(const Feature&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Feature> features);

  std::size_t size() const { return features_.size(); }
  const Feature& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<Feature>& features() const { return features_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Feature> features_;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Row-major table of optionally-missing values conforming to a Schema.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return dim() == 0 ? 0 : values_.size() / dim(); }
  std::size_t dim() const { return schema_.size(); }
  bool empty() const { return size() == 0; }

  double at(std::size_t row, std::size_t feature) const { return values_[row * dim() + feature]; }
  double& at(std::size_t row, std::size_t feature) { return values_[row * dim() + feature]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * dim(), dim()}; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * dim(), dim()}; }

  void add_row(std::span<const double> values);
  void reserve(std::size_t rows) { values_.reserve(rows * dim()); }

  std::size_t missing_count() const;

  /// Rows `ids` in order, keeping this schema.
  Dataset subset(std::span<const std::size_t> ids) const;

  /// Identical values (NaN == NaN) and schema.
  bool same_values(const Dataset& other) const;

 private:
  Schema schema_;
  std::vector<double> values_;
};

/// Boolean cell mask with the shape of a dataset; true = masked.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;

  Mask() = default;
  Mask(std::size_t r, std::size_t c) : rows(r), cols(c), cells(r * c, 0) {}
  bool at(std::size_t r, std::size_t c) const { return cells[r * cols + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { cells[r * cols + c] = v ? 1 : 0; }
  std::size_t count() const;
};

struct CsvOptions {
  std::string missing_token;  // empty cells are always missing
  char delimiter = ',';
};

/// Loads a CSV with a header row, typing each column and learning its domain
/// from the non-missing entries.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const CsvOptions& options = {});

/// Loads a CSV against a fixed schema (columns matched by header name).
/// Numeric values outside the schema domain are kept; unknown modalities are
/// a DataError.
Dataset load_csv(const std::string& path, const Schema& schema, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const Schema& schema, const CsvOptions& options = {});

/// Canonical CSV rendering: shortest round-trip numbers, reals always carry a
/// decimal point or exponent, missing cells written as `missing_token`.
std::string to_csv(const Dataset& ds, const std::string& missing_token = "");
void write_csv(const Dataset& ds, const std::string& path, const std::string& missing_token = "");

std::string to_csv(const Mask& mask);
Mask load_mask(const std::string& path);
void write_mask(const Mask& mask, const std::string& path);

/// Formats one stored value as its CSV token (unquoted).
std::string format_value(const FeatureDomain& domain, double value);

/// Re-learns every domain from the rows of `ds`: numeric ranges become the
/// observed min/max and categorical lists keep only observed modalities.
Dataset relearn_domains(const Dataset& ds);

struct MaskedDataset {
  Dataset data;
  Mask mask;
};

/// Masks each cell independently with probability `rate`.
MaskedDataset apply_mcar(const Dataset& ds, double rate, std::uint64_t seed);

enum class SynthDomain { RingGauss, GridGauss, CircGauss, RandGauss };

std::optional<SynthDomain> synth_domain_from_name(std::string_view name);
Dataset synth_domain(SynthDomain domain, std::uint64_t seed);
Dataset synth_domain(std::string_view name, std::uint64_t seed);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace genforest
