#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "genforest/forest.hpp"
#include "genforest/rng.hpp"

namespace genforest {

enum class Order { Iterative, Randomized };

/// Per-observation generation state: one star node per tree, the running
/// support, and (GF) the training rows compatible with it.
struct SamplerState {
  std::vector<int> star;
  std::vector<bool> done;
  Support support;
  std::vector<std::uint32_t> rows;

  bool all_done() const;
};

SamplerState init_sampling(const Forest& forest);

/// Probability that the next step of `tree` moves to the right child.
double head_probability(const Forest& forest, std::size_t tree, const SamplerState& state);

/// Moves the star node of `tree` to the child on side `right`. Returns the
/// probability of that branch. In builds with assertions enabled, checks that
/// the running support lies inside the star node's support.
double star_step(const Forest& forest, std::size_t tree, SamplerState& state, bool right);

/// One coin toss and step for `tree`.
void star_update(const Forest& forest, std::size_t tree, SamplerState& state, Rng& rng);

/// Runs trees in index order until each reaches a leaf.
SamplerState iterative_update_support(const Forest& forest, Rng& rng);

/// Repeatedly steps a tree drawn uniformly among those not yet at a leaf.
SamplerState randomized_update_support(const Forest& forest, Rng& rng);

/// One observation drawn uniformly (per feature, independently) in `s`.
std::vector<double> draw_uniform(const Support& s, const Schema& schema, Rng& rng);

struct GenerateOptions {
  Order order = Order::Iterative;
  std::size_t threads = 1;
};

/// n observations; observation i uses its own stream Rng::stream(seed, i), so
/// the output does not depend on n or on the thread count.
Dataset generate(const Forest& forest, std::size_t n, std::uint64_t seed, const GenerateOptions& options = {});

/// Probability of reaching the leaf tuple `leaves` when trees are stepped in
/// the order `steps` (tree index per step; tree t appears depth(leaves[t])
/// times). Throws std::invalid_argument for an inadmissible sequence.
double sequence_probability(const Forest& forest, std::span<const int> leaves, std::span<const std::size_t> steps);

/// KL divergence between the cell distributions of two forests with the same
/// trees (cells with zero probability under `p` are skipped).
double kl_divergence(const Forest& p, const Forest& q, std::size_t cap = 1'000'000);

/// Smallest kappa such that at every reachable generation step of a GF, for
/// both branches v with non-empty C_v, p_R[C_v | X_child] / p_U[C_v | X_child]
/// lies in [exp(-kappa), exp(kappa)]. Infinite when such a branch holds no
/// training rows.
double realized_kappa(const Forest& gf, std::size_t cap = 1'000'000);

}  // namespace genforest
