#pragma once

#include <optional>
#include <span>
#include <vector>

#include "genforest/data.hpp"

namespace genforest {

/// Numeric restriction with per-end openness. Closed by default.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const { return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi); }
  bool operator==(const Interval&) const = default;
};

/// Restriction of one feature. Numeric features use `interval`; categorical
/// features use `modalities` (one flag per modality of the domain).
struct Restriction {
  Interval interval;
  std::vector<bool> modalities;

  bool operator==(const Restriction&) const = default;
};

/// Axis-aligned region: one restriction per feature of a schema.
using Support = std::vector<Restriction>;

Support full_support(const Schema& schema);

bool is_empty(const Restriction& r, const FeatureDomain& domain);
bool is_empty(const Support& s, const Schema& schema);

/// Per-feature intersection; nullopt when some feature becomes empty.
std::optional<Restriction> intersect(const Restriction& a, const Restriction& b, const FeatureDomain& domain);
std::optional<Support> intersect(const Support& a, const Support& b, const Schema& schema);

/// Membership of a stored value. Missing values are wildcards (always inside).
bool contains(const Restriction& r, const FeatureDomain& domain, double v);
bool contains(const Support& s, const Schema& schema, std::span<const double> row);

bool is_subset(const Restriction& a, const Restriction& b, const FeatureDomain& domain);
bool is_subset(const Support& a, const Support& b, const Schema& schema);

/// Size of a restriction in the feature's natural measure: length for Real,
/// number of integers for Integer, number of modalities for Categorical. A Real
/// feature with a constant domain measures 1 on its single point.
double restriction_measure(const Restriction& r, const FeatureDomain& domain);

/// restriction_measure relative to the full domain, in [0, 1].
double restriction_fraction(const Restriction& r, const FeatureDomain& domain);

/// Uniform measure of `piece` relative to `whole` along one feature. A
/// zero-length `whole` is a point: the ratio is 1 if `piece` is non-empty.
double restriction_ratio(const Restriction& piece, const Restriction& whole, const FeatureDomain& domain);

/// Uniform product measure of a support; 1 for the full domain.
double uniform_mass(const Schema& schema, const Support& s);

/// Product of restriction_measure over `features` (all features when empty).
double volume(const Schema& schema, const Support& s, std::span<const std::size_t> features = {});

/// Count of rows compatible with `s` under wildcard semantics.
std::size_t compatible_count(const Dataset& ds, const Support& s);

/// Share of a row compatible with `s` that `s` holds when each missing value
/// is spread uniformly over its domain: the product of restriction_fraction
/// over the row's missing features. Observed values are not checked.
double missing_share(std::span<const double> row, const Support& s, const Schema& schema);

/// missing_share for compatible rows, 0 otherwise.
double row_weight(std::span<const double> row, const Support& s, const Schema& schema);

/// Sum of row_weight over the data, divided by m. Additive over disjoint
/// supports and equal to compatible_count / m on complete data.
double empirical_mass(const Dataset& ds, const Support& s);

}  // namespace genforest
