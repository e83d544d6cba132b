#pragma once
// Independent reference computations for the tests.
//
// Everything here works from raw node predicates and raw rows: boxes are
// rebuilt by walking root-to-leaf paths, rows are routed one at a time, and
// partitions come from the full Cartesian product of leaves. Nothing calls
// the library's measure, partition or sampler code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <map>
#include <numeric>
#include <vector>

#include "genforest/data.hpp"
#include "genforest/forest.hpp"

namespace oracle {

using genforest::Dataset;
using genforest::FeatureKind;
using genforest::Forest;
using genforest::Schema;
using genforest::SplitPredicate;
using genforest::Tree;

// The right child takes x > t, or x >= t with strict_left; a categorical
// right child takes the modalities flagged in right_set.
inline bool goes_right(const SplitPredicate& p, double v, bool categorical) {
  if (categorical) return p.right_set.at(static_cast<std::size_t>(v));
  return p.strict_left ? v >= p.threshold : v > p.threshold;
}

inline int route(const Tree& tree, const Schema& schema, std::span<const double> x) {
  int id = 0;
  while (!tree[id].is_leaf()) {
    const auto& p = *tree[id].split;
    id = goes_right(p, x[p.feature], schema[p.feature].domain.is_categorical()) ? tree[id].right : tree[id].left;
  }
  return id;
}

// Per-feature box: an interval with open/closed ends, or a modality set.
struct Box {
  std::vector<double> lo, hi;
  std::vector<bool> lo_open, hi_open;
  std::vector<std::vector<bool>> cats;
};

inline Box full_box(const Schema& schema) {
  Box b;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& d = schema[f].domain;
    b.lo.push_back(d.lo);
    b.hi.push_back(d.hi);
    b.lo_open.push_back(false);
    b.hi_open.push_back(false);
    b.cats.push_back(std::vector<bool>(d.cardinality(), true));
  }
  return b;
}

inline void cut(Box& b, const Schema& schema, const SplitPredicate& p, bool right) {
  const std::size_t f = p.feature;
  if (schema[f].domain.is_categorical()) {
    for (std::size_t k = 0; k < b.cats[f].size(); ++k) {
      if (p.right_set[k] != right) b.cats[f][k] = false;
    }
    return;
  }
  const double t = p.threshold;
  if (right) {
    // (t, inf) or [t, inf)
    const bool open = !p.strict_left;
    if (t > b.lo[f] || (t == b.lo[f] && open)) {
      b.lo[f] = t;
      b.lo_open[f] = open;
    }
  } else {
    const bool open = p.strict_left;
    if (t < b.hi[f] || (t == b.hi[f] && open)) {
      b.hi[f] = t;
      b.hi_open[f] = open;
    }
  }
}

inline Box leaf_box(const Tree& tree, const Schema& schema, int leaf) {
  std::vector<int> path;
  for (int id = leaf; id != -1; id = tree[id].parent) path.push_back(id);
  std::reverse(path.begin(), path.end());
  Box b = full_box(schema);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto& node = tree[path[i]];
    cut(b, schema, *node.split, node.right == path[i + 1]);
  }
  return b;
}

inline Box meet(const Box& a, const Box& b) {
  Box out = a;
  for (std::size_t f = 0; f < a.lo.size(); ++f) {
    if (b.lo[f] > out.lo[f] || (b.lo[f] == out.lo[f] && b.lo_open[f])) {
      out.lo[f] = b.lo[f];
      out.lo_open[f] = b.lo_open[f];
    }
    if (b.hi[f] < out.hi[f] || (b.hi[f] == out.hi[f] && b.hi_open[f])) {
      out.hi[f] = b.hi[f];
      out.hi_open[f] = b.hi_open[f];
    }
    for (std::size_t k = 0; k < out.cats[f].size(); ++k) out.cats[f][k] = a.cats[f][k] && b.cats[f][k];
  }
  return out;
}

// Integers in the interval, counted one by one.
inline double integer_count(double lo, bool lo_open, double hi, bool hi_open) {
  double n = 0;
  for (double v = std::floor(lo); v <= hi; v += 1) {
    if (v < lo || (v == lo && lo_open)) continue;
    if (v > hi || (v == hi && hi_open)) continue;
    n += 1;
  }
  return n;
}

inline bool box_empty(const Box& b, const Schema& schema) {
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& d = schema[f].domain;
    if (d.is_categorical()) {
      if (std::none_of(b.cats[f].begin(), b.cats[f].end(), [](bool x) { return x; })) return true;
    } else if (d.kind == FeatureKind::Integer) {
      if (integer_count(b.lo[f], b.lo_open[f], b.hi[f], b.hi_open[f]) == 0) return true;
    } else if (b.lo[f] > b.hi[f] || (b.lo[f] == b.hi[f] && (b.lo_open[f] || b.hi_open[f]))) {
      return true;
    }
  }
  return false;
}

// Share of the feature's domain covered by the box.
inline double feature_fraction(const Box& b, const Schema& schema, std::size_t f) {
  const auto& d = schema[f].domain;
  if (d.is_categorical()) {
    return static_cast<double>(std::count(b.cats[f].begin(), b.cats[f].end(), true)) /
           static_cast<double>(d.cardinality());
  }
  if (d.kind == FeatureKind::Integer) {
    return integer_count(b.lo[f], b.lo_open[f], b.hi[f], b.hi_open[f]) / (d.hi - d.lo + 1);
  }
  if (d.hi == d.lo) return 1.0;
  return std::max(0.0, b.hi[f] - b.lo[f]) / (d.hi - d.lo);
}

inline double box_uniform(const Box& b, const Schema& schema) {
  if (box_empty(b, schema)) return 0.0;
  double u = 1;
  for (std::size_t f = 0; f < schema.size(); ++f) u *= feature_fraction(b, schema, f);
  return u;
}

// Uniform mass of `piece` given `whole`, feature by feature. Zero-length
// real sides are atoms: they contribute a factor of 1 when non-empty.
inline double box_conditional(const Box& piece, const Box& whole, const Schema& schema) {
  if (box_empty(piece, schema)) return 0.0;
  double u = 1;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const double p = feature_fraction(piece, schema, f);
    const double w = feature_fraction(whole, schema, f);
    if (p > 0 && w > 0) u *= p / w;
  }
  return u;
}

inline bool box_contains(const Box& b, const Schema& schema, std::span<const double> x) {
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const double v = x[f];
    if (std::isnan(v)) continue;
    if (schema[f].domain.is_categorical()) {
      if (!b.cats[f][static_cast<std::size_t>(v)]) return false;
      continue;
    }
    if (v < b.lo[f] || (v == b.lo[f] && b.lo_open[f])) return false;
    if (v > b.hi[f] || (v == b.hi[f] && b.hi_open[f])) return false;
  }
  return true;
}

inline std::size_t rows_in(const Box& b, const Dataset& ds) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) n += box_contains(b, ds.schema(), ds.row(r)) ? 1 : 0;
  return n;
}

struct Cell {
  std::vector<int> leaves;
  Box box;
  std::size_t count = 0;
  double u = 0;
};

// Every leaf tuple with a non-empty box, with rows counted by routing
// complete rows through each tree.
inline std::vector<Cell> brute_partition(const Forest& forest, const Dataset& ds) {
  const Schema& schema = forest.schema;
  std::vector<std::vector<int>> leaves;
  for (const auto& t : forest.trees) leaves.push_back(t.leaves());
  std::map<std::vector<int>, std::size_t> routed;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<int> key;
    for (const auto& t : forest.trees) key.push_back(route(t, schema, ds.row(r)));
    ++routed[key];
  }
  std::vector<Cell> out;
  std::vector<std::size_t> idx(leaves.size(), 0);
  while (true) {
    Cell c;
    c.box = full_box(schema);
    for (std::size_t t = 0; t < leaves.size(); ++t) {
      c.leaves.push_back(leaves[t][idx[t]]);
      c.box = meet(c.box, leaf_box(forest.trees[t], schema, leaves[t][idx[t]]));
    }
    if (!box_empty(c.box, schema)) {
      auto it = routed.find(c.leaves);
      c.count = it == routed.end() ? 0 : it->second;
      c.u = box_uniform(c.box, schema);
      out.push_back(std::move(c));
    }
    std::size_t t = 0;
    while (t < idx.size() && ++idx[t] == leaves[t].size()) idx[t++] = 0;
    if (t == idx.size()) break;
  }
  return out;
}

// Bayes risks written out from their definitions.
inline double bayes_square(double u) { return u * (1 - u); }
inline double bayes_log(double u) {
  double s = 0;
  if (u > 0) s -= u * std::log(u);
  if (u < 1) s -= (1 - u) * std::log(1 - u);
  return s;
}
inline double bayes_matusita(double u) { return 2 * std::sqrt(u * (1 - u)); }

template <typename Bayes>
double mixture_risk(double pi, double r, double u, Bayes bayes) {
  const double pm = pi * r + (1 - pi) * u;
  return pm > 0 ? pm * bayes(pi * r / pm) : 0.0;
}

template <typename Bayes>
double brute_poprisk(const Forest& forest, const Dataset& ds, double pi, Bayes bayes) {
  double s = 0;
  for (const auto& c : brute_partition(forest, ds)) {
    s += mixture_risk(pi, static_cast<double>(c.count) / static_cast<double>(ds.size()), c.u, bayes);
  }
  return s;
}

// One generation step: node `id` of tree `t` moving toward `child`.
struct Step {
  std::size_t tree;
  int node;
  int child;
};

// Steps of a leaf tuple when trees are visited in the order `order`
// (tree index per step).
inline std::vector<Step> steps_for(const Forest& forest, const std::vector<int>& leaves,
                                   const std::vector<std::size_t>& order) {
  std::vector<std::vector<int>> paths;
  for (std::size_t t = 0; t < leaves.size(); ++t) {
    std::vector<int> p;
    for (int id = leaves[t]; id != -1; id = forest.trees[t][id].parent) p.push_back(id);
    std::reverse(p.begin(), p.end());
    paths.push_back(p);
  }
  std::vector<std::size_t> pos(leaves.size(), 0);
  std::vector<Step> out;
  for (auto t : order) {
    out.push_back({t, paths[t][pos[t]], paths[t][pos[t] + 1]});
    ++pos[t];
  }
  return out;
}

inline std::vector<std::size_t> iterative_order(const Forest& forest, const std::vector<int>& leaves) {
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < leaves.size(); ++t) {
    for (int k = 0; k < forest.trees[t][leaves[t]].depth; ++k) order.push_back(t);
  }
  return order;
}

// Probability of a step sequence under the GF coin: the share of rows
// still consistent with the running box that fall on the chosen side.
inline double gf_sequence_probability(const Forest& forest, const Dataset& ds, const std::vector<Step>& steps) {
  const Schema& schema = forest.schema;
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  double prob = 1;
  for (const auto& s : steps) {
    const auto& node = forest.trees[s.tree][s.node];
    const auto& p = *node.split;
    const bool right = node.right == s.child;
    const bool cat = schema[p.feature].domain.is_categorical();
    std::vector<std::size_t> kept;
    for (auto r : rows) {
      if (goes_right(p, ds.at(r, p.feature), cat) == right) kept.push_back(r);
    }
    if (rows.empty()) return 0.0;
    prob *= static_cast<double>(kept.size()) / static_cast<double>(rows.size());
    rows = std::move(kept);
  }
  return prob;
}

// Probability of a step sequence under the uniform-corrected EOGT coin,
// with arc probabilities taken from routed counts.
inline double eogt_sequence_probability(const Forest& forest, const Dataset& ds, const std::vector<Step>& steps) {
  const Schema& schema = forest.schema;
  Box c = full_box(schema);
  double prob = 1;
  for (const auto& s : steps) {
    const Tree& tree = forest.trees[s.tree];
    const auto& node = tree[s.node];
    const Box xr = leaf_box(tree, schema, node.right);
    const Box xl = leaf_box(tree, schema, node.left);
    const double nr = static_cast<double>(rows_in(xr, ds));
    const double nl = static_cast<double>(rows_in(xl, ds));
    const double arc = nr / (nr + nl);
    const double a = box_conditional(meet(c, xr), xr, schema);
    const double b = box_conditional(meet(c, xl), xl, schema);
    double head = 0;
    if (a * arc + b * (1 - arc) > 0) {
      head = a * arc / (a * arc + b * (1 - arc));
    } else {
      head = a > 0 ? 1.0 : 0.0;
    }
    const bool right = node.right == s.child;
    prob *= right ? head : 1 - head;
    c = meet(c, right ? xr : xl);
  }
  return prob;
}

// All distinct arrangements of the multiset of tree indices in `order`.
inline std::vector<std::vector<std::size_t>> all_orders(std::vector<std::size_t> order) {
  std::sort(order.begin(), order.end());
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

// Largest |log(p_R[C_v | X_v] / p_U[C_v | X_v])| over reachable iterative
// steps and both branches with a non-empty C_v; rows are routed directly.
inline double realized_kappa(const Forest& forest, const Dataset& ds) {
  const Schema& schema = forest.schema;
  double kappa = 0;
  bool infinite = false;
  struct Frame {
    std::size_t tree;
    int node;
    Box c;
    std::vector<std::size_t> rows;
  };
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Frame> stack{{0, 0, full_box(schema), all}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    if (fr.tree == forest.trees.size()) continue;
    const Tree& tree = forest.trees[fr.tree];
    const auto& node = tree[fr.node];
    if (node.is_leaf()) {
      stack.push_back({fr.tree + 1, 0, fr.c, fr.rows});
      continue;
    }
    const auto& p = *node.split;
    const bool cat = schema[p.feature].domain.is_categorical();
    for (bool right : {false, true}) {
      const int child = right ? node.right : node.left;
      const Box xv = leaf_box(tree, schema, child);
      const Box cv = meet(fr.c, xv);
      if (box_empty(cv, schema)) continue;
      std::vector<std::size_t> kept;
      for (auto r : fr.rows) {
        if (goes_right(p, ds.at(r, p.feature), cat) == right) kept.push_back(r);
      }
      const double pr = static_cast<double>(kept.size()) / static_cast<double>(rows_in(xv, ds));
      const double pu = box_uniform(cv, schema) / box_uniform(xv, schema);
      if (pr == 0 || pu == 0) {
        infinite = true;
      } else {
        kappa = std::max(kappa, std::abs(std::log(pr / pu)));
      }
      // Only branches the GF coin can take are reachable.
      if (!kept.empty()) stack.push_back({fr.tree, child, cv, std::move(kept)});
    }
  }
  return infinite ? std::numeric_limits<double>::infinity() : kappa;
}

}  // namespace oracle
