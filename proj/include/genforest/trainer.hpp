#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "genforest/forest.hpp"
#include "genforest/loss.hpp"

namespace genforest {

struct TrainConfig {
  std::size_t splits = 0;  // J
  std::size_t trees = 1;   // T
  Loss loss{LossKind::Square};
  double prior = 0.5;
  ForestMode mode = ForestMode::GF;
  std::size_t cat_cutoff = 22;     // exhaustive categorical search up to this many modalities
  std::size_t cat_samples = 1000;  // random subsets tried above the cutoff
  std::size_t min_child_rows = 1;  // both children of a split need this many compatible rows
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Weak-learning witness of one split.
struct WlaWitness {
  double gamma = 0.0;       // |p_R[right | leaf] - p_U[right | leaf]|
  double kappa = 0.0;       // pi p_R[leaf] / p_M[leaf]
  double leaf_mass = 0.0;   // p_M[leaf]
  double leaf_bound = 0.0;  // 1 / number of leaves of the tree before the split
};

struct HistoryEntry {
  std::size_t iteration = 0;
  std::size_t tree = 0;
  int leaf = 0;
  std::size_t feature = 0;
  std::string predicate;
  double poprisk = 0.0;
  WlaWitness wla;
};

struct Candidate {
  SplitPredicate predicate;
  double delta = 0.0;  // change of the scored expected Bayes risk
};

/// Greedy top-down induction state. Keeps the partition cells that hold at
/// least one training row; cells without rows contribute nothing to the risk.
class Trainer {
 public:
  Trainer(std::shared_ptr<const Dataset> data, TrainConfig config);

  const Forest& forest() const { return forest_; }
  const TrainConfig& config() const { return config_; }

  /// Heaviest leaf (by training rows) not yet marked terminal; ties go to the
  /// lowest (tree, leaf id).
  std::optional<std::pair<std::size_t, int>> pick_tree_and_leaf() const;

  /// Best admissible split of a leaf, or nullopt.
  std::optional<Candidate> split_pred(std::size_t tree, int leaf) const;

  /// Whether `p` cuts the leaf into two non-degenerate children with enough rows.
  bool admissible(std::size_t tree, int leaf, const SplitPredicate& p) const;

  /// Scored risk change of a split, computed directly from the affected cells.
  double risk_delta(std::size_t tree, int leaf, const SplitPredicate& p) const;

  /// Splits the leaf and refreshes the cells. Returns the history record.
  HistoryEntry apply(std::size_t tree, int leaf, const SplitPredicate& p);

  /// One greedy iteration; false when no leaf can be split.
  bool step();

  void mark_terminal(std::size_t tree, int leaf);

  /// Expected Bayes risk with p_R from training counts.
  double poprisk() const;

  /// Risk under the scoring measure (counts for GF, chained approximations for EOGT).
  double scored_poprisk() const;

  std::size_t cell_count() const { return cells_.size(); }
  const std::vector<HistoryEntry>& history() const { return history_; }

  /// The trained model; an EOGT drops its dataset binding.
  Forest finish() const;

 private:
  struct Cell {
    std::vector<int> leaves;
    Support support;
    std::vector<std::uint32_t> rows;
    double u = 0.0;      // uniform mass
    double r = 0.0;      // empirical mass
    double rhat = 0.0;   // scoring mass: r (GF) or chained approximation (EOGT)
  };

  std::vector<std::size_t> affected(std::size_t tree, int leaf) const;
  std::optional<Candidate> best_numeric(std::size_t tree, int leaf, std::size_t f, const std::vector<std::size_t>& cells) const;
  std::optional<Candidate> best_categorical(std::size_t tree, int leaf, std::size_t f, const std::vector<std::size_t>& cells) const;
  double cell_score(double r, double u) const;

  std::shared_ptr<const Dataset> data_;
  TrainConfig config_;
  Forest forest_;
  std::vector<Cell> cells_;
  std::vector<std::vector<bool>> terminal_;
  std::vector<HistoryEntry> history_;
  std::size_t iteration_ = 0;
};

struct TrainResult {
  Forest forest;
  std::vector<HistoryEntry> history;
  double initial_poprisk = 0.0;
  std::size_t splits_done = 0;
  bool stopped_early = false;
};

TrainResult train(std::shared_ptr<const Dataset> data, const TrainConfig& config);

/// History as CSV: iteration, tree, leaf, feature, predicate, poprisk and the witness.
std::string history_csv(const std::vector<HistoryEntry>& history, const Schema& schema);

}  // namespace genforest
