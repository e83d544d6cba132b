#include "genforest/imputer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "genforest/errors.hpp"
#include "genforest/parallel.hpp"
#include "genforest/sampler.hpp"

namespace genforest {

std::vector<ConditionalTuple> conditional_tuples(const Forest& forest, std::span<const double> x, std::size_t cap) {
  const Schema& schema = forest.schema;
  if (x.size() != schema.size()) throw DataError("observation width does not match schema");
  PartitionOptions options;
  options.cap = cap;
  Support region = full_support(schema);
  std::vector<std::size_t> missing;
  bool any_observed = false;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& dom = schema[f].domain;
    if (is_missing(x[f])) {
      missing.push_back(f);
      continue;
    }
    if (!dom.contains(x[f])) {
      throw DataError("observed value of feature '" + schema[f].name + "' lies outside the model domain");
    }
    any_observed = true;
    if (dom.is_categorical()) {
      region[f].modalities.assign(dom.cardinality(), false);
      region[f].modalities[static_cast<std::size_t>(x[f])] = true;
    } else {
      region[f].interval = Interval{x[f], x[f], false, false};
    }
  }
  if (any_observed) options.region = region;

  const auto elements = enumerate_partition(forest, options);
  if (elements.empty()) throw std::logic_error("no leaf tuple is consistent with the observed values");
  std::vector<ConditionalTuple> out;
  out.reserve(elements.size());
  for (const auto& e : elements) {
    ConditionalTuple c;
    c.leaves = e.leaves;
    c.support = any_observed ? e.restricted : e.support;
    c.mass = e.mass;
    const double vol = missing.empty() ? 1.0 : volume(schema, c.support, missing);
    if (vol <= 0) {
      c.point_mass = c.mass > 0;
      c.density = c.mass;
    } else {
      c.density = c.mass / vol;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> impute(const Forest& forest, std::span<const double> x, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  if (std::none_of(x.begin(), x.end(), is_missing)) return out;
  const auto tuples = conditional_tuples(forest, x);

  // Point masses dominate any finite density.
  const bool any_point = std::any_of(tuples.begin(), tuples.end(), [](const auto& t) { return t.point_mass; });
  double best = 0;
  for (const auto& t : tuples) {
    if (t.point_mass == any_point) best = std::max(best, t.density);
  }
  std::vector<std::size_t> winners;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i].point_mass != any_point) continue;
    if (tuples[i].density >= best - 1e-12 * best) winners.push_back(i);
  }
  const auto& chosen = tuples[winners[rng.index(winners.size())]];
  const auto draw = draw_uniform(chosen.support, forest.schema, rng);
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (is_missing(out[f])) out[f] = draw[f];
  }
  return out;
}

Dataset impute_dataset(const Forest& forest, const Dataset& masked, std::uint64_t seed, std::size_t threads) {
  if (!(masked.schema() == forest.schema)) throw DataError("dataset schema does not match the model");
  Dataset out = masked;
  parallel_for(masked.size(), threads, [&](std::size_t r) {
    const auto row = masked.row(r);
    if (std::none_of(row.begin(), row.end(), is_missing)) return;
    Rng rng = Rng::stream(seed, r);
    const auto filled = impute(forest, row, rng);
    std::copy(filled.begin(), filled.end(), out.row(r).begin());
  });
  return out;
}

Dataset marginal_impute(const Dataset& train, const Dataset& masked, std::uint64_t seed, MarginalMode mode) {
  if (!(train.schema() == masked.schema())) throw DataError("training and masked schemas differ");
  const Schema& schema = train.schema();
  const std::size_t d = schema.size();
  std::vector<std::vector<double>> observed(d);
  for (std::size_t r = 0; r < train.size(); ++r) {
    for (std::size_t f = 0; f < d; ++f) {
      if (!is_missing(train.at(r, f))) observed[f].push_back(train.at(r, f));
    }
  }

  std::vector<double> fixed(d, kMissing);
  for (std::size_t f = 0; f < d; ++f) {
    bool needed = false;
    for (std::size_t r = 0; r < masked.size() && !needed; ++r) needed = is_missing(masked.at(r, f));
    if (!needed) continue;
    if (observed[f].empty()) throw DataError("column '" + schema[f].name + "' has no observed training value");
    if (mode == MarginalMode::Sample) continue;
    const auto& dom = schema[f].domain;
    if (mode == MarginalMode::Mean && dom.is_numeric()) {
      double sum = 0;
      for (double v : observed[f]) sum += v;
      fixed[f] = sum / static_cast<double>(observed[f].size());
      if (dom.kind == FeatureKind::Integer) fixed[f] = std::round(fixed[f]);
    } else {
      std::map<double, std::size_t> freq;
      for (double v : observed[f]) ++freq[v];
      std::size_t top = 0;
      for (const auto& [v, n] : freq) {
        if (n > top) top = n, fixed[f] = v;
      }
    }
  }

  Dataset out = masked;
  for (std::size_t r = 0; r < masked.size(); ++r) {
    for (std::size_t f = 0; f < d; ++f) {
      if (!is_missing(masked.at(r, f))) continue;
      if (mode == MarginalMode::Sample) {
        Rng rng = Rng::stream(seed, r * d + f);
        out.at(r, f) = observed[f][rng.index(observed[f].size())];
      } else {
        out.at(r, f) = fixed[f];
      }
    }
  }
  return out;
}

}  // namespace genforest
