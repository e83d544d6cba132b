#include "genforest/measure.hpp"

#include <algorithm>
#include <cmath>

namespace genforest {

namespace {

// Integer bounds [first, last] of an interval; empty when first > last.
std::pair<double, double> integer_bounds(const Interval& iv) {
  const double first = iv.lo_open ? std::floor(iv.lo) + 1 : std::ceil(iv.lo);
  const double last = iv.hi_open ? std::ceil(iv.hi) - 1 : std::floor(iv.hi);
  return {first, last};
}

bool interval_empty(const Interval& iv, FeatureKind kind) {
  if (kind == FeatureKind::Integer) {
    auto [first, last] = integer_bounds(iv);
    return first > last;
  }
  if (iv.lo < iv.hi) return false;
  return !(iv.lo == iv.hi && !iv.lo_open && !iv.hi_open);
}

}  // namespace

Support full_support(const Schema& schema) {
  Support s(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& dom = schema[f].domain;
    if (dom.is_categorical()) {
      s[f].modalities.assign(dom.cardinality(), true);
    } else {
      s[f].interval = Interval{dom.lo, dom.hi, false, false};
    }
  }
  return s;
}

bool is_empty(const Restriction& r, const FeatureDomain& domain) {
  if (domain.is_categorical()) return std::none_of(r.modalities.begin(), r.modalities.end(), [](bool b) { return b; });
  return interval_empty(r.interval, domain.kind);
}

bool is_empty(const Support& s, const Schema& schema) {
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (is_empty(s[f], schema[f].domain)) return true;
  }
  return false;
}

std::optional<Restriction> intersect(const Restriction& a, const Restriction& b, const FeatureDomain& domain) {
  Restriction out;
  if (domain.is_categorical()) {
    out.modalities.resize(a.modalities.size());
    for (std::size_t k = 0; k < a.modalities.size(); ++k) out.modalities[k] = a.modalities[k] && b.modalities[k];
  } else {
    const auto& x = a.interval;
    const auto& y = b.interval;
    auto& iv = out.interval;
    if (x.lo > y.lo) {
      iv.lo = x.lo, iv.lo_open = x.lo_open;
    } else if (y.lo > x.lo) {
      iv.lo = y.lo, iv.lo_open = y.lo_open;
    } else {
      iv.lo = x.lo, iv.lo_open = x.lo_open || y.lo_open;
    }
    if (x.hi < y.hi) {
      iv.hi = x.hi, iv.hi_open = x.hi_open;
    } else if (y.hi < x.hi) {
      iv.hi = y.hi, iv.hi_open = y.hi_open;
    } else {
      iv.hi = x.hi, iv.hi_open = x.hi_open || y.hi_open;
    }
  }
  if (is_empty(out, domain)) return std::nullopt;
  return out;
}

std::optional<Support> intersect(const Support& a, const Support& b, const Schema& schema) {
  if (a.size() != schema.size() || b.size() != schema.size()) {
    throw std::invalid_argument("support does not match schema");
  }
  Support out(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    auto r = intersect(a[f], b[f], schema[f].domain);
    if (!r) return std::nullopt;
    out[f] = std::move(*r);
  }
  return out;
}

bool contains(const Restriction& r, const FeatureDomain& domain, double v) {
  if (is_missing(v)) return true;
  if (domain.is_categorical()) {
    const auto k = static_cast<std::size_t>(v);
    return k < r.modalities.size() && r.modalities[k];
  }
  return r.interval.contains(v);
}

bool contains(const Support& s, const Schema& schema, std::span<const double> row) {
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!contains(s[f], schema[f].domain, row[f])) return false;
  }
  return true;
}

bool is_subset(const Restriction& a, const Restriction& b, const FeatureDomain& domain) {
  if (is_empty(a, domain)) return true;
  if (domain.is_categorical()) {
    for (std::size_t k = 0; k < a.modalities.size(); ++k) {
      if (a.modalities[k] && !b.modalities[k]) return false;
    }
    return true;
  }
  if (domain.kind == FeatureKind::Integer) {
    auto [af, al] = integer_bounds(a.interval);
    auto [bf, bl] = integer_bounds(b.interval);
    return af >= bf && al <= bl;
  }
  const auto& x = a.interval;
  const auto& y = b.interval;
  const bool lo_ok = x.lo > y.lo || (x.lo == y.lo && (!y.lo_open || x.lo_open));
  const bool hi_ok = x.hi < y.hi || (x.hi == y.hi && (!y.hi_open || x.hi_open));
  return lo_ok && hi_ok;
}

bool is_subset(const Support& a, const Support& b, const Schema& schema) {
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!is_subset(a[f], b[f], schema[f].domain)) return false;
  }
  return true;
}

double restriction_measure(const Restriction& r, const FeatureDomain& domain) {
  if (is_empty(r, domain)) return 0.0;
  switch (domain.kind) {
    case FeatureKind::Categorical:
      return static_cast<double>(std::count(r.modalities.begin(), r.modalities.end(), true));
    case FeatureKind::Integer: {
      auto [first, last] = integer_bounds(r.interval);
      return last - first + 1;
    }
    case FeatureKind::Real:
      if (domain.lo == domain.hi) return 1.0;
      return r.interval.hi - r.interval.lo;
  }
  return 0.0;
}

double restriction_fraction(const Restriction& r, const FeatureDomain& domain) {
  double full = 1.0;
  switch (domain.kind) {
    case FeatureKind::Categorical:
      full = static_cast<double>(domain.cardinality());
      break;
    case FeatureKind::Integer:
      full = domain.hi - domain.lo + 1;
      break;
    case FeatureKind::Real:
      full = domain.lo == domain.hi ? 1.0 : domain.hi - domain.lo;
      break;
  }
  return restriction_measure(r, domain) / full;
}

double restriction_ratio(const Restriction& piece, const Restriction& whole, const FeatureDomain& domain) {
  if (is_empty(piece, domain)) return 0.0;
  const double w = restriction_measure(whole, domain);
  return w > 0 ? restriction_measure(piece, domain) / w : 1.0;
}

double uniform_mass(const Schema& schema, const Support& s) {
  double mass = 1.0;
  for (std::size_t f = 0; f < schema.size(); ++f) mass *= restriction_fraction(s[f], schema[f].domain);
  return mass;
}

double volume(const Schema& schema, const Support& s, std::span<const std::size_t> features) {
  double vol = 1.0;
  if (features.empty()) {
    for (std::size_t f = 0; f < schema.size(); ++f) vol *= restriction_measure(s[f], schema[f].domain);
  } else {
    for (auto f : features) vol *= restriction_measure(s[f], schema[f].domain);
  }
  return vol;
}

std::size_t compatible_count(const Dataset& ds, const Support& s) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (contains(s, ds.schema(), ds.row(r))) ++n;
  }
  return n;
}

double missing_share(std::span<const double> row, const Support& s, const Schema& schema) {
  double w = 1.0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (std::isnan(row[f])) w *= restriction_fraction(s[f], schema[f].domain);
  }
  return w;
}

double row_weight(std::span<const double> row, const Support& s, const Schema& schema) {
  return contains(s, schema, row) ? missing_share(row, s, schema) : 0.0;
}

double empirical_mass(const Dataset& ds, const Support& s) {
  if (ds.empty()) return 0.0;
  double sum = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) sum += row_weight(ds.row(r), s, ds.schema());
  return sum / static_cast<double>(ds.size());
}

}  // namespace genforest
