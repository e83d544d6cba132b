#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "genforest/forest.hpp"
#include "genforest/rng.hpp"

namespace genforest {

/// A leaf tuple consistent with the observed part of an observation.
struct ConditionalTuple {
  std::vector<int> leaves;
  Support support;          // cell restricted to the observed values
  double mass = 0.0;        // GF: empirical mass of the cell; EOGT: generation probability
  double density = 0.0;     // mass over the volume of the missing features
  bool point_mass = false;  // zero volume with positive mass
};

/// Leaf tuples meeting the observed values of `x` (missing cells are NaN).
/// With no observed value this is the whole partition.
std::vector<ConditionalTuple> conditional_tuples(const Forest& forest, std::span<const double> x,
                                                 std::size_t cap = 1'000'000);

/// Fills the missing cells of `x` uniformly inside a maximal-density tuple,
/// chosen uniformly among ties (relative tolerance 1e-12).
std::vector<double> impute(const Forest& forest, std::span<const double> x, Rng& rng);

/// Row-wise impute; row r uses Rng::stream(seed, r).
Dataset impute_dataset(const Forest& forest, const Dataset& masked, std::uint64_t seed, std::size_t threads = 1);

enum class MarginalMode { Sample, Mean, Mode };

/// Baseline filling each missing cell from the column's observed training
/// values: a uniform draw (Sample), the mean (Mean; mode for categorical
/// columns, rounded for integers) or the most frequent value (Mode).
Dataset marginal_impute(const Dataset& train, const Dataset& masked, std::uint64_t seed,
                        MarginalMode mode = MarginalMode::Sample);

}  // namespace genforest
