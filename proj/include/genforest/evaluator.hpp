#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genforest/data.hpp"
#include "genforest/trainer.hpp"

namespace genforest {

/// Share of masked categorical cells imputed wrongly; nullopt without any.
std::optional<double> perr(const Dataset& imputed, const Dataset& truth, const Mask& mask);

/// Root mean squared error over masked numeric cells; nullopt without any.
std::optional<double> rmse(const Dataset& imputed, const Dataset& truth, const Mask& mask);

/// Per-feature mean and standard deviation of the observed values (numeric
/// features only; zeros for categorical ones).
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> sd;
};

FeatureStats feature_stats(const Dataset& ds);

enum class GroundCost { L1, SquaredL2 };

struct OtOptions {
  double eps = 0.5;
  std::size_t max_iterations = 10'000;
  double tolerance = 1e-6;  // L1 violation of the row marginal
  GroundCost ground = GroundCost::L1;
};

struct OtResult {
  double cost = 0.0;  // transport cost of the regularized plan
  std::size_t iterations = 0;
  bool converged = false;
};

/// Entropic optimal transport between the empirical distributions of `a` and
/// `b` (log-domain Sinkhorn). Numeric features are standardized with `stats`
/// (features with zero spread cost nothing); categorical features cost 1 when
/// they differ; a missing value on either side costs nothing.
OtResult sinkhorn_ot(const Dataset& a, const Dataset& b, const FeatureStats& stats, const OtOptions& options = {});

/// Re-encodes `ds` against `target` (same feature names and kinds); categorical
/// values are matched by modality name.
Dataset conform(const Dataset& ds, const Schema& target);

/// Fold index per row. Stratified on the last categorical column when there
/// is one, plain shuffled otherwise.
std::vector<std::size_t> fold_assignment(const Dataset& ds, std::size_t k, std::uint64_t seed);

struct LifelikeConfig {
  std::size_t folds = 5;
  TrainConfig train;
  OtOptions ot;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  OtResult model;    // generated by the trained forest
  OtResult copy;     // training rows used as if generated
  OtResult uniform;  // uniform noise over the training domain
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

struct LifelikeResult {
  std::vector<FoldResult> folds;
  Summary model;
  Summary copy;
  Summary uniform;
};

LifelikeResult kfold_lifelike(const Dataset& ds, const LifelikeConfig& config);

std::string lifelike_csv(const LifelikeResult& result);

Summary summarize(const std::vector<double>& values);

/// Welch's unequal-variance two-sample t-test (two-sided).
struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace genforest
