#include "genforest/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "genforest/errors.hpp"
#include "genforest/parallel.hpp"

namespace genforest {

bool SamplerState::all_done() const { return std::all_of(done.begin(), done.end(), [](bool d) { return d; }); }

SamplerState init_sampling(const Forest& forest) {
  if (forest.trees.empty()) throw std::invalid_argument("forest has no trees");
  if (forest.mode == ForestMode::GF && !forest.data) throw ModelError("GF model is not bound to its training data");
  SamplerState s;
  s.star.assign(forest.trees.size(), 0);
  s.done.resize(forest.trees.size());
  for (std::size_t t = 0; t < forest.trees.size(); ++t) s.done[t] = forest.trees[t][0].is_leaf();
  s.support = full_support(forest.schema);
  if (forest.mode == ForestMode::GF) {
    s.rows.resize(forest.data->size());
    for (std::size_t r = 0; r < s.rows.size(); ++r) s.rows[r] = static_cast<std::uint32_t>(r);
  }
  return s;
}

double head_probability(const Forest& forest, std::size_t tree, const SamplerState& state) {
  const Tree& tr = forest.trees[tree];
  return right_branch_probability(forest, tr[state.star[tree]], tr, state.support, state.rows);
}

double star_step(const Forest& forest, std::size_t tree, SamplerState& state, bool right) {
  if (state.done[tree]) throw std::logic_error("star_step on a finished tree");
  const Tree& tr = forest.trees[tree];
  const Node& node = tr[state.star[tree]];
#ifndef NDEBUG
  if (!is_subset(state.support, node.support, forest.schema)) {
    throw std::logic_error("running support escaped the star node support");
  }
#endif
  const double pr = right_branch_probability(forest, node, tr, state.support, state.rows);
  const int child = right ? node.right : node.left;
  const std::size_t f = node.split->feature;
  auto piece = intersect(state.support[f], tr[child].support[f], forest.schema[f].domain);
  if (!piece) throw std::invalid_argument("branch leads to an empty support");
  state.support[f] = std::move(*piece);
  if (forest.mode == ForestMode::GF) state.rows = filter_rows(*forest.data, state.rows, *node.split, right);
  state.star[tree] = child;
  state.done[tree] = tr[child].is_leaf();
  return right ? pr : 1 - pr;
}

void star_update(const Forest& forest, std::size_t tree, SamplerState& state, Rng& rng) {
  const bool right = rng.bernoulli(head_probability(forest, tree, state));
  star_step(forest, tree, state, right);
}

SamplerState iterative_update_support(const Forest& forest, Rng& rng) {
  SamplerState s = init_sampling(forest);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    while (!s.done[t]) star_update(forest, t, s, rng);
  }
  return s;
}

SamplerState randomized_update_support(const Forest& forest, Rng& rng) {
  SamplerState s = init_sampling(forest);
  std::vector<std::size_t> pending;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    if (!s.done[t]) pending.push_back(t);
  }
  while (!pending.empty()) {
    const auto i = static_cast<std::size_t>(rng.index(pending.size()));
    const std::size_t t = pending[i];
    star_update(forest, t, s, rng);
    if (s.done[t]) pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return s;
}

std::vector<double> draw_uniform(const Support& s, const Schema& schema, Rng& rng) {
  std::vector<double> x(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& dom = schema[f].domain;
    const auto& r = s[f];
    if (is_empty(r, dom)) throw std::invalid_argument("draw_uniform on an empty support");
    switch (dom.kind) {
      case FeatureKind::Categorical: {
        std::vector<std::size_t> allowed;
        for (std::size_t k = 0; k < r.modalities.size(); ++k) {
          if (r.modalities[k]) allowed.push_back(k);
        }
        x[f] = static_cast<double>(allowed[rng.index(allowed.size())]);
        break;
      }
      case FeatureKind::Integer: {
        const double first = r.interval.lo_open ? std::floor(r.interval.lo) + 1 : std::ceil(r.interval.lo);
        const double last = r.interval.hi_open ? std::ceil(r.interval.hi) - 1 : std::floor(r.interval.hi);
        x[f] = first + static_cast<double>(rng.index(static_cast<std::uint64_t>(last - first) + 1));
        break;
      }
      case FeatureKind::Real: {
        if (r.interval.lo == r.interval.hi) {
          x[f] = r.interval.lo;
          break;
        }
        double v = 0;
        do {
          v = rng.uniform(r.interval.lo, r.interval.hi);
        } while (!r.interval.contains(v));
        x[f] = v;
        break;
      }
    }
  }
  return x;
}

Dataset generate(const Forest& forest, std::size_t n, std::uint64_t seed, const GenerateOptions& options) {
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const SamplerState s = options.order == Order::Iterative ? iterative_update_support(forest, rng)
                                                             : randomized_update_support(forest, rng);
    rows[i] = draw_uniform(s.support, forest.schema, rng);
  });
  Dataset out(forest.schema);
  out.reserve(n);
  for (const auto& r : rows) out.add_row(r);
  return out;
}

double sequence_probability(const Forest& forest, std::span<const int> leaves, std::span<const std::size_t> steps) {
  const std::size_t T = forest.trees.size();
  if (leaves.size() != T) throw std::invalid_argument("one leaf per tree expected");
  std::vector<std::vector<int>> paths(T);
  std::vector<std::size_t> pos(T, 0);
  std::vector<std::size_t> uses(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    if (leaves[t] < 0 || static_cast<std::size_t>(leaves[t]) >= forest.trees[t].size() ||
        !forest.trees[t][leaves[t]].is_leaf()) {
      throw std::invalid_argument("leaf tuple entry is not a leaf");
    }
    paths[t] = forest.trees[t].path_to(leaves[t]);
  }
  for (auto t : steps) {
    if (t >= T) throw std::invalid_argument("step refers to an unknown tree");
    ++uses[t];
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (uses[t] + 1 != paths[t].size()) throw std::invalid_argument("steps do not match the leaf depths");
  }
  SamplerState s = init_sampling(forest);
  double prob = 1.0;
  for (auto t : steps) {
    const Node& node = forest.trees[t][s.star[t]];
    const int next = paths[t][++pos[t]];
    const bool right = next == node.right;
    const std::size_t f = node.split->feature;
    if (!intersect(s.support[f], forest.trees[t][next].support[f], forest.schema[f].domain)) return 0.0;
    prob *= star_step(forest, t, s, right);
  }
  return prob;
}

double kl_divergence(const Forest& p, const Forest& q, std::size_t cap) {
  PartitionOptions options;
  options.cap = cap;
  const auto ep = enumerate_partition(p, options);
  const auto eq = enumerate_partition(q, options);
  if (ep.size() != eq.size()) throw std::invalid_argument("forests do not share their trees");
  double kl = 0;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    if (ep[i].leaves != eq[i].leaves) throw std::invalid_argument("forests do not share their trees");
    const double a = ep[i].probability;
    const double b = eq[i].probability;
    if (a <= 0) continue;
    if (b <= 0) return std::numeric_limits<double>::infinity();
    kl += a * std::log(a / b);
  }
  return kl;
}

namespace {

class KappaSearch {
 public:
  KappaSearch(const Forest& gf, std::size_t cap) : gf_(gf), cap_(cap) {
    node_mass_.resize(gf.trees.size());
    for (std::size_t t = 0; t < gf.trees.size(); ++t) {
      node_mass_[t].resize(gf.trees[t].size());
      for (std::size_t id = 0; id < gf.trees[t].size(); ++id) {
        node_mass_[t][id] = empirical_mass(*gf.data, gf.trees[t][id].support);
      }
    }
    visit(init_sampling(gf));
  }

  double kappa() const { return kappa_; }

 private:
  void visit(const SamplerState& s) {
    std::size_t t = 0;
    while (t < s.done.size() && s.done[t]) ++t;
    if (t == s.done.size()) {
      if (++cells_ > cap_) throw CapacityError("kappa search exceeded the cell cap");
      return;
    }
    const Tree& tree = gf_.trees[t];
    const Node& node = tree[s.star[t]];
    const std::size_t f = node.split->feature;
    const auto& dom = gf_.schema[f].domain;
    for (bool right : {false, true}) {
      const int child = right ? node.right : node.left;
      auto piece = intersect(s.support[f], tree[child].support[f], dom);
      if (!piece) continue;
      const auto rows = filter_rows(*gf_.data, s.rows, *node.split, right);
      if (rows.empty()) {
        kappa_ = std::numeric_limits<double>::infinity();
        continue;
      }
      Support cv = s.support;
      cv[f] = *piece;
      double w = 0;
      for (auto r : rows) w += missing_share(gf_.data->row(r), cv, gf_.schema);
      const double pr = w / static_cast<double>(gf_.m) / node_mass_[t][child];
      const double pu = uniform_mass(gf_.schema, cv) / uniform_mass(gf_.schema, tree[child].support);
      kappa_ = std::max(kappa_, std::abs(std::log(pr / pu)));
      SamplerState next = s;
      star_step(gf_, t, next, right);
      visit(next);
    }
  }

  const Forest& gf_;
  std::size_t cap_;
  std::size_t cells_ = 0;
  double kappa_ = 0.0;
  std::vector<std::vector<double>> node_mass_;
};

}  // namespace

double realized_kappa(const Forest& gf, std::size_t cap) {
  if (gf.mode != ForestMode::GF) throw std::invalid_argument("realized_kappa needs a GF");
  return KappaSearch(gf, cap).kappa();
}

}  // namespace genforest
