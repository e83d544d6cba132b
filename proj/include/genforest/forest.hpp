#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genforest/data.hpp"
#include "genforest/loss.hpp"
#include "genforest/measure.hpp"

namespace genforest {

enum class ForestMode { GF, EOGT };

std::string_view to_string(ForestMode mode);

/// Binary test at an internal node. The right child holds the rows for which
/// the test is true.
///
/// Numeric: true iff x > threshold, or x >= threshold when `strict_left` is set
/// (the left side is then x < threshold). Categorical: true iff x is in
/// `right_set`.
struct SplitPredicate {
  std::size_t feature = 0;
  double threshold = 0.0;
  bool strict_left = false;
  std::vector<bool> right_set;

  /// Outcome for a non-missing value.
  bool test(double v, const FeatureDomain& domain) const;

  Restriction right_restriction(const Restriction& parent, const FeatureDomain& domain) const;
  Restriction left_restriction(const Restriction& parent, const FeatureDomain& domain) const;

  bool operator==(const SplitPredicate&) const = default;
};

std::string describe(const SplitPredicate& p, const Schema& schema);

struct Node {
  std::optional<SplitPredicate> split;
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 0;
  Support support;
  std::size_t count = 0;             // training rows compatible with support
  double weight = 0.0;               // GF during training: rows weighted by missing_share
  double arc_prob = 0.0;             // internal nodes: p_R[right child | node]
  std::vector<std::uint32_t> rows;   // leaves of a GF: compatible training rows, sorted

  bool is_leaf() const { return !split.has_value(); }
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(const Schema& schema);

  std::size_t size() const { return nodes_.size(); }
  const Node& operator[](std::size_t id) const { return nodes_[id]; }
  Node& operator[](std::size_t id) { return nodes_[id]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::vector<int> leaves() const;
  std::size_t leaf_count() const;

  /// Turns leaf `id` into an internal node with two fresh leaves. Both child
  /// supports must be non-empty. Returns {left, right}.
  std::pair<int, int> split_leaf(int id, SplitPredicate predicate, const Schema& schema);

  /// Node ids from the root down to `id`, inclusive.
  std::vector<int> path_to(int id) const;

  /// Leaf reached by a complete observation.
  int leaf_of(std::span<const double> x, const Schema& schema) const;

 private:
  std::vector<Node> nodes_;
};

/// A set of trees over one schema. A GF is bound to its training data; an
/// EOGT keeps only per-arc probabilities.
struct Forest {
  Schema schema;
  std::vector<Tree> trees;
  double prior = 0.5;
  ForestMode mode = ForestMode::GF;
  std::size_t m = 0;
  std::shared_ptr<const Dataset> data;
  std::uint64_t data_hash = 0;
  std::string data_source;

  std::size_t total_splits() const;
};

/// Roots only, bound to `data` (GF).
Forest make_root_forest(std::shared_ptr<const Dataset> data, std::size_t trees, double prior);

/// Rows of `rows` that satisfy the restriction of `side` on the predicate's
/// feature (missing values pass both sides).
std::vector<std::uint32_t> filter_rows(const Dataset& ds, std::span<const std::uint32_t> rows,
                                       const SplitPredicate& p, bool right);

/// Probability of moving to the right child of internal node `node` when the
/// running support is `c`. GF: weighted share of `rows_c` (rows compatible
/// with c) falling on the right. EOGT: the uniform-corrected arc probability.
double right_branch_probability(const Forest& forest, const Node& node, const Tree& tree, const Support& c,
                                std::span<const std::uint32_t> rows_c);

/// Uniform-corrected right-branch probability of an arc with probability p,
/// where a = U(C_right)/U(X_right) and b = U(C_left)/U(X_left).
double corrected_branch_probability(double a, double b, double p);

struct PartitionElement {
  std::vector<int> leaves;            // leaf id per tree
  Support support;                    // intersection of the leaf supports
  Support restricted;                 // support within PartitionOptions::region, if one was given
  std::optional<std::size_t> count;   // compatible training rows (GF only)
  double mass = 0.0;                  // GF: empirical_mass of support; EOGT: probability
  double uniform_mass = 0.0;
  int depth = 0;                      // sum of leaf depths
  double probability = 0.0;           // generation probability in tree order
};

struct PartitionOptions {
  std::size_t cap = 1'000'000;
  /// Restricts enumeration to leaf tuples meeting this region. Counts,
  /// uniform masses and probabilities still describe the whole cell.
  std::optional<Support> region;
};

/// All leaf tuples with non-empty intersection, enumerated tree by tree.
/// Throws CapacityError above options.cap elements.
std::vector<PartitionElement> enumerate_partition(const Forest& forest, const PartitionOptions& options = {});

/// The element containing a complete in-domain observation.
PartitionElement partition_element_of(const Forest& forest, std::span<const double> x);

struct Density {
  double value = 0.0;
  bool point_mass = false;  // zero-volume cell: value is the cell probability
};

Density density(const Forest& forest, std::span<const double> x);

/// Same trees with arcs labelled by empirical branch probabilities and the
/// dataset binding dropped. Identity on an EOGT.
Forest to_eogt(const Forest& forest);

/// Sum over cells of probability times total leaf depth.
double expected_depth(const Forest& forest, std::size_t cap = 1'000'000);

/// Expected Bayes risk over the partition, with p_R from counts (GF) or
/// generation probabilities (EOGT).
double poprisk(const Forest& forest, const Loss& loss, double pi, std::size_t cap = 1'000'000);

/// Same quantity summed leaf by leaf of tree `tree`.
double poprisk_by_leaves(const Forest& forest, const Loss& loss, double pi, std::size_t tree,
                         std::size_t cap = 1'000'000);

/// Versioned text serialization.
std::string to_text(const Forest& forest);
void save_forest(const Forest& forest, const std::string& path);

/// Parses a model. A GF needs `data` whose canonical CSV hash matches the one
/// recorded at training time; otherwise ModelError.
Forest from_text(const std::string& text, std::shared_ptr<const Dataset> data = nullptr);
Forest load_forest(const std::string& path, std::shared_ptr<const Dataset> data = nullptr);

/// Reads only the schema and mode of a model file, so the caller can load the
/// matching training CSV.
struct ModelHeader {
  ForestMode mode = ForestMode::GF;
  Schema schema;
  std::string data_source;
};
ModelHeader peek_model(const std::string& path);

/// Hash binding a GF to its training data.
std::uint64_t dataset_hash(const Dataset& ds);

}  // namespace genforest
