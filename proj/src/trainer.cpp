#include "genforest/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "genforest/errors.hpp"
#include "genforest/parallel.hpp"
#include "genforest/rng.hpp"

namespace genforest {

void TrainConfig::validate() const {
  if (trees < 1) throw std::invalid_argument("at least one tree is required");
  if (!(prior > 0 && prior < 1)) throw std::invalid_argument("prior must lie in (0, 1)");
  if (cat_cutoff < 2) throw std::invalid_argument("categorical cutoff must be at least 2");
  if (cat_cutoff > 62) throw std::invalid_argument("categorical cutoff above 62 is not supported");
  if (threads < 1) throw std::invalid_argument("at least one thread is required");
}

namespace {

// Real pieces of zero length would be atoms with infinite density.
bool real_degenerate(const Restriction& piece, const FeatureDomain& dom) {
  return dom.kind == FeatureKind::Real && dom.lo != dom.hi && restriction_measure(piece, dom) <= 0;
}

std::size_t count_side(const Dataset& ds, std::span<const std::uint32_t> rows, const SplitPredicate& p, bool right) {
  const auto& dom = ds.schema()[p.feature].domain;
  std::size_t n = 0;
  for (auto r : rows) {
    const double v = ds.at(r, p.feature);
    if (is_missing(v) || p.test(v, dom) == right) ++n;
  }
  return n;
}

// Weighted row mass on each side of `p` within support `s` (unnormalized).
// Rows missing the split feature are divided by the uniform share of each piece.
std::pair<double, double> side_weights(const Dataset& ds, std::span<const std::uint32_t> rows, const SplitPredicate& p,
                                       const Support& s) {
  const auto& schema = ds.schema();
  const auto& dom = schema[p.feature].domain;
  const double sl = restriction_ratio(p.left_restriction(s[p.feature], dom), s[p.feature], dom);
  const double sr = restriction_ratio(p.right_restriction(s[p.feature], dom), s[p.feature], dom);
  double wl = 0;
  double wr = 0;
  for (auto r : rows) {
    const auto row = ds.row(r);
    const double w = missing_share(row, s, schema);
    const double v = row[p.feature];
    if (is_missing(v)) {
      wl += w * sl, wr += w * sr;
    } else if (p.test(v, dom)) {
      wr += w;
    } else {
      wl += w;
    }
  }
  return {wl, wr};
}

double total_weight(const Dataset& ds, std::span<const std::uint32_t> rows, const Support& s) {
  double w = 0;
  for (auto r : rows) w += missing_share(ds.row(r), s, ds.schema());
  return w;
}

}  // namespace

Trainer::Trainer(std::shared_ptr<const Dataset> data, TrainConfig config)
    : data_(std::move(data)), config_(std::move(config)) {
  config_.validate();
  forest_ = make_root_forest(data_, config_.trees, config_.prior);
  terminal_.assign(config_.trees, std::vector<bool>(1, false));
  Cell root;
  root.leaves.assign(config_.trees, 0);
  root.support = full_support(forest_.schema);
  root.rows = forest_.trees[0][0].rows;
  root.u = 1.0;
  root.r = 1.0;
  root.rhat = 1.0;
  cells_.push_back(std::move(root));
}

double Trainer::cell_score(double r, double u) const { return cell_risk(config_.loss, config_.prior, r, u); }

std::optional<std::pair<std::size_t, int>> Trainer::pick_tree_and_leaf() const {
  std::optional<std::pair<std::size_t, int>> best;
  double best_weight = 0;
  for (std::size_t t = 0; t < forest_.trees.size(); ++t) {
    const Tree& tree = forest_.trees[t];
    for (std::size_t id = 0; id < tree.size(); ++id) {
      if (!tree[id].is_leaf() || terminal_[t][id]) continue;
      if (!best || tree[id].weight > best_weight) {
        best = {t, static_cast<int>(id)};
        best_weight = tree[id].weight;
      }
    }
  }
  return best;
}

void Trainer::mark_terminal(std::size_t tree, int leaf) { terminal_.at(tree).at(static_cast<std::size_t>(leaf)) = true; }

std::vector<std::size_t> Trainer::affected(std::size_t tree, int leaf) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].leaves[tree] == leaf) out.push_back(c);
  }
  return out;
}

bool Trainer::admissible(std::size_t tree, int leaf, const SplitPredicate& p) const {
  const Node& node = forest_.trees.at(tree)[static_cast<std::size_t>(leaf)];
  if (!node.is_leaf() || node.rows.empty() || p.feature >= forest_.schema.size()) return false;
  const auto& dom = forest_.schema[p.feature].domain;
  if (dom.is_categorical() && p.right_set.size() != dom.cardinality()) return false;
  const Restriction left = p.left_restriction(node.support[p.feature], dom);
  const Restriction right = p.right_restriction(node.support[p.feature], dom);
  if (is_empty(left, dom) || is_empty(right, dom)) return false;
  if (real_degenerate(left, dom) || real_degenerate(right, dom)) return false;
  for (auto c : affected(tree, leaf)) {
    const auto& cr = cells_[c].support[p.feature];
    const auto l = intersect(cr, left, dom);
    const auto r = intersect(cr, right, dom);
    if (l && r && (real_degenerate(*l, dom) || real_degenerate(*r, dom))) return false;
  }
  const auto nl = count_side(*data_, node.rows, p, false);
  const auto nr = count_side(*data_, node.rows, p, true);
  return nl >= config_.min_child_rows && nr >= config_.min_child_rows;
}

double Trainer::risk_delta(std::size_t tree, int leaf, const SplitPredicate& p) const {
  if (!admissible(tree, leaf, p)) throw std::invalid_argument("risk_delta: predicate is not admissible at this leaf");
  const Node& node = forest_.trees[tree][static_cast<std::size_t>(leaf)];
  const std::size_t f = p.feature;
  const auto& dom = forest_.schema[f].domain;
  const double m = static_cast<double>(forest_.m);

  Support xl = node.support;
  Support xr = node.support;
  xl[f] = p.left_restriction(node.support[f], dom);
  xr[f] = p.right_restriction(node.support[f], dom);
  const auto [nl, nr] = side_weights(*data_, node.rows, p, node.support);
  const double arc = nr / (nl + nr);

  double delta = 0;
  for (auto c : affected(tree, leaf)) {
    const Cell& cell = cells_[c];
    auto lp = intersect(cell.support[f], xl[f], dom);
    auto rp = intersect(cell.support[f], xr[f], dom);
    if (!lp || !rp) continue;
    Support cl = cell.support;
    Support cr = cell.support;
    cl[f] = *lp;
    cr[f] = *rp;
    const double ul = uniform_mass(forest_.schema, cl);
    const double ur = uniform_mass(forest_.schema, cr);
    double rl = 0;
    double rr = 0;
    if (config_.mode == ForestMode::GF) {
      const auto [wl, wr] = side_weights(*data_, cell.rows, p, cell.support);
      rl = wl / m;
      rr = wr / m;
    } else {
      // Only feature f differs between the cell pieces and the leaf children;
      // the shared factor of the other features cancels in the correction.
      const double ph = corrected_branch_probability(restriction_ratio(*rp, xr[f], dom),
                                                     restriction_ratio(*lp, xl[f], dom), arc);
      rr = cell.rhat * ph;
      rl = cell.rhat * (1 - ph);
    }
    delta += cell_score(rl, ul) + cell_score(rr, ur) - cell_score(cell.rhat, cell.u);
  }
  return delta;
}

std::optional<Candidate> Trainer::best_numeric(std::size_t tree, int leaf, std::size_t f,
                                               const std::vector<std::size_t>& cells) const {
  const Node& node = forest_.trees[tree][static_cast<std::size_t>(leaf)];
  const auto& dom = forest_.schema[f].domain;
  const Dataset& ds = *data_;
  const double m = static_cast<double>(forest_.m);

  // Observed values sorted with their row weights; prefix sums give the
  // weighted mass below a cut.
  struct Weighted {
    std::vector<double> values;
    std::vector<double> prefix;  // prefix[i] = weight of the first i values
    std::size_t missing = 0;
    double missing_weight = 0;
  };
  auto collect = [&](std::span<const std::uint32_t> rows, const Support& s, Weighted& out) {
    std::vector<std::pair<double, double>> vw;
    vw.reserve(rows.size());
    out.missing = 0;
    out.missing_weight = 0;
    for (auto r : rows) {
      const auto row = ds.row(r);
      const double w = missing_share(row, s, ds.schema());
      if (is_missing(row[f])) {
        ++out.missing;
        out.missing_weight += w;
      } else {
        vw.emplace_back(row[f], w);
      }
    }
    std::sort(vw.begin(), vw.end());
    out.values.resize(vw.size());
    out.prefix.assign(vw.size() + 1, 0.0);
    for (std::size_t i = 0; i < vw.size(); ++i) {
      out.values[i] = vw[i].first;
      out.prefix[i + 1] = out.prefix[i] + vw[i].second;
    }
  };
  Weighted leaf_data;
  collect(node.rows, node.support, leaf_data);
  const auto& values = leaf_data.values;
  const std::size_t leaf_missing = leaf_data.missing;
  std::vector<double> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) return std::nullopt;

  // Observed-value boundaries of every gap, on both sides of the gap.
  struct Cut {
    double t;
    bool strict;
  };
  std::vector<Cut> cuts;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    cuts.push_back({distinct[i], false});
    if (dom.kind == FeatureKind::Real) {
      cuts.push_back({distinct[i + 1], true});
    } else if (distinct[i + 1] - 1 > distinct[i]) {
      cuts.push_back({distinct[i + 1] - 1, false});
    }
  }
  const std::size_t n = cuts.size();
  auto count_left = [](const std::vector<double>& sorted, const Cut& cut) {
    const auto it = cut.strict ? std::lower_bound(sorted.begin(), sorted.end(), cut.t)
                               : std::upper_bound(sorted.begin(), sorted.end(), cut.t);
    return static_cast<std::size_t>(it - sorted.begin());
  };
  auto predicate = [&](const Cut& cut) {
    SplitPredicate p;
    p.feature = f;
    p.threshold = cut.t;
    p.strict_left = cut.strict;
    return p;
  };

  // Leaf-level admissibility and branch statistics.
  const Restriction& li = node.support[f];
  std::vector<bool> valid(n, true);
  std::vector<double> arc(n, 0.0);
  std::vector<Restriction> leaf_left(n);
  std::vector<Restriction> leaf_right(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto p = predicate(cuts[j]);
    const Restriction l = p.left_restriction(li, dom);
    const Restriction r = p.right_restriction(li, dom);
    if (is_empty(l, dom) || is_empty(r, dom) || real_degenerate(l, dom) || real_degenerate(r, dom)) {
      valid[j] = false;
      continue;
    }
    const std::size_t below = count_left(values, cuts[j]);
    const std::size_t nl = below + leaf_missing;
    const std::size_t nr = values.size() - below + leaf_missing;
    if (nl < config_.min_child_rows || nr < config_.min_child_rows) {
      valid[j] = false;
      continue;
    }
    const double wl = leaf_data.prefix[below] + leaf_data.missing_weight * restriction_ratio(l, li, dom);
    const double wr = leaf_data.prefix.back() - leaf_data.prefix[below] + leaf_data.missing_weight * restriction_ratio(r, li, dom);
    arc[j] = wr / (wl + wr);
    leaf_left[j] = l;
    leaf_right[j] = r;
  }

  std::vector<double> delta(n, 0.0);
  Weighted cell_data;
  for (auto c : cells) {
    const Cell& cell = cells_[c];
    const Restriction& ci = cell.support[f];
    if (config_.mode == ForestMode::GF) collect(cell.rows, cell.support, cell_data);
    const double base = cell_score(cell.rhat, cell.u);

    // Only cuts with a threshold inside the cell interval can split it.
    auto first = std::lower_bound(cuts.begin(), cuts.end(), ci.interval.lo, [](const Cut& a, double v) { return a.t < v; });
    for (auto it = first; it != cuts.end() && it->t <= ci.interval.hi; ++it) {
      const std::size_t j = static_cast<std::size_t>(it - cuts.begin());
      if (!valid[j]) continue;
      const auto p = predicate(*it);
      const Restriction l = p.left_restriction(ci, dom);
      const Restriction r = p.right_restriction(ci, dom);
      if (is_empty(l, dom) || is_empty(r, dom)) continue;
      if (real_degenerate(l, dom) || real_degenerate(r, dom)) {
        valid[j] = false;
        continue;
      }
      const double fl = restriction_ratio(l, ci, dom);
      const double fr = restriction_ratio(r, ci, dom);
      const double ul = cell.u * fl;
      const double ur = cell.u * fr;
      double rl = 0;
      double rr = 0;
      if (config_.mode == ForestMode::GF) {
        const std::size_t below = count_left(cell_data.values, *it);
        rl = (cell_data.prefix[below] + cell_data.missing_weight * fl) / m;
        rr = (cell_data.prefix.back() - cell_data.prefix[below] + cell_data.missing_weight * fr) / m;
      } else {
        const double ph = corrected_branch_probability(restriction_ratio(r, leaf_right[j], dom),
                                                       restriction_ratio(l, leaf_left[j], dom), arc[j]);
        rr = cell.rhat * ph;
        rl = cell.rhat * (1 - ph);
      }
      delta[j] += cell_score(rl, ul) + cell_score(rr, ur) - base;
    }
  }

  std::optional<Candidate> best;
  for (std::size_t j = 0; j < n; ++j) {
    if (!valid[j]) continue;
    if (!best || delta[j] < best->delta) best = Candidate{predicate(cuts[j]), delta[j]};
  }
  return best;
}

std::optional<Candidate> Trainer::best_categorical(std::size_t tree, int leaf, std::size_t f,
                                                   const std::vector<std::size_t>& cells) const {
  const Node& node = forest_.trees[tree][static_cast<std::size_t>(leaf)];
  const auto& dom = forest_.schema[f].domain;
  const Dataset& ds = *data_;
  const double m = static_cast<double>(forest_.m);

  std::vector<std::size_t> allowed;
  std::vector<int> slot(dom.cardinality(), -1);
  for (std::size_t k = 0; k < dom.cardinality(); ++k) {
    if (node.support[f].modalities[k]) {
      slot[k] = static_cast<int>(allowed.size());
      allowed.push_back(k);
    }
  }
  const std::size_t k = allowed.size();
  if (k < 2) return std::nullopt;

  // Subsets of slots 1..k-1 sent right; slot 0 always stays left.
  std::vector<std::uint64_t> masks;
  if (k <= config_.cat_cutoff) {
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (k - 1)); ++mask) masks.push_back(mask << 1);
  } else {
    if (k > 63) throw DataError("categorical feature '" + forest_.schema[f].name + "' has too many modalities to split");
    Rng rng = Rng::stream(config_.seed ^ Rng::mix(iteration_), (tree << 32) ^ (static_cast<std::uint64_t>(leaf) << 8) ^ f);
    std::set<std::uint64_t> drawn;
    const std::uint64_t full = (std::uint64_t{1} << k) - 1;
    for (std::size_t i = 0; i < config_.cat_samples; ++i) {
      std::uint64_t mask = rng.next() & full;
      if (mask & 1) mask = ~mask & full;
      if (mask != 0) drawn.insert(mask);
    }
    masks.assign(drawn.begin(), drawn.end());
  }

  // Per-slot row counts and weights, plus rows missing f.
  struct Tally {
    std::vector<std::size_t> counts;
    std::vector<double> weights;
    std::size_t missing = 0;
    double missing_weight = 0;
  };
  auto tally = [&](std::span<const std::uint32_t> rows, const Support& s, Tally& out) {
    out.counts.assign(k, 0);
    out.weights.assign(k, 0.0);
    out.missing = 0;
    out.missing_weight = 0;
    for (auto r : rows) {
      const auto row = ds.row(r);
      const double w = missing_share(row, s, ds.schema());
      const double v = row[f];
      if (is_missing(v)) {
        ++out.missing;
        out.missing_weight += w;
      } else if (slot[static_cast<std::size_t>(v)] >= 0) {
        const auto i = static_cast<std::size_t>(slot[static_cast<std::size_t>(v)]);
        ++out.counts[i];
        out.weights[i] += w;
      }
    }
  };

  Tally leaf_tally;
  tally(node.rows, node.support, leaf_tally);

  struct CellStats {
    Tally tally;
    std::uint64_t present = 0;  // slots allowed in the cell
    double base = 0;
  };
  std::vector<CellStats> stats(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells_[cells[i]];
    if (config_.mode == ForestMode::GF) tally(cell.rows, cell.support, stats[i].tally);
    for (std::size_t s = 0; s < k; ++s) {
      if (cell.support[f].modalities[allowed[s]]) stats[i].present |= std::uint64_t{1} << s;
    }
    stats[i].base = cell_score(cell.rhat, cell.u);
  }

  std::optional<Candidate> best;
  for (auto mask : masks) {
    std::size_t nr = leaf_tally.missing;
    std::size_t nl = leaf_tally.missing;
    for (std::size_t s = 0; s < k; ++s) ((mask >> s) & 1 ? nr : nl) += leaf_tally.counts[s];
    if (nl < config_.min_child_rows || nr < config_.min_child_rows) continue;
    const double right_size = std::popcount(mask);
    const double left_size = static_cast<double>(k) - right_size;
    double wr = leaf_tally.missing_weight * right_size / static_cast<double>(k);
    double wl = leaf_tally.missing_weight * left_size / static_cast<double>(k);
    for (std::size_t s = 0; s < k; ++s) ((mask >> s) & 1 ? wr : wl) += leaf_tally.weights[s];
    const double arc = wr / (wl + wr);

    double delta = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& st = stats[i];
      const std::uint64_t in_right = st.present & mask;
      const std::uint64_t in_left = st.present & ~mask;
      if (in_right == 0 || in_left == 0) continue;
      const Cell& cell = cells_[cells[i]];
      const double present = std::popcount(st.present);
      const double ur = cell.u * std::popcount(in_right) / present;
      const double ul = cell.u * std::popcount(in_left) / present;
      double rl = 0;
      double rr = 0;
      if (config_.mode == ForestMode::GF) {
        double cr = st.tally.missing_weight * std::popcount(in_right) / present;
        double cl = st.tally.missing_weight * std::popcount(in_left) / present;
        for (std::size_t s = 0; s < k; ++s) ((mask >> s) & 1 ? cr : cl) += st.tally.weights[s];
        rl = cl / m;
        rr = cr / m;
      } else {
        const double ph = corrected_branch_probability(std::popcount(in_right) / right_size,
                                                       std::popcount(in_left) / left_size, arc);
        rr = cell.rhat * ph;
        rl = cell.rhat * (1 - ph);
      }
      delta += cell_score(rl, ul) + cell_score(rr, ur) - st.base;
    }
    if (!best || delta < best->delta) {
      SplitPredicate p;
      p.feature = f;
      p.right_set.assign(dom.cardinality(), false);
      for (std::size_t s = 0; s < k; ++s) {
        if ((mask >> s) & 1) p.right_set[allowed[s]] = true;
      }
      best = Candidate{std::move(p), delta};
    }
  }
  return best;
}

std::optional<Candidate> Trainer::split_pred(std::size_t tree, int leaf) const {
  const Node& node = forest_.trees.at(tree)[static_cast<std::size_t>(leaf)];
  if (!node.is_leaf()) throw std::invalid_argument("split_pred on an internal node");
  const auto cells = affected(tree, leaf);
  const std::size_t d = forest_.schema.size();
  std::vector<std::optional<Candidate>> per_feature(d);
  parallel_for(d, config_.threads, [&](std::size_t f) {
    per_feature[f] = forest_.schema[f].domain.is_categorical() ? best_categorical(tree, leaf, f, cells)
                                                               : best_numeric(tree, leaf, f, cells);
  });
  std::optional<Candidate> best;
  for (auto& c : per_feature) {
    if (c && (!best || c->delta < best->delta)) best = std::move(c);
  }
  return best;
}

HistoryEntry Trainer::apply(std::size_t tree, int leaf, const SplitPredicate& p) {
  if (!admissible(tree, leaf, p)) throw std::invalid_argument("apply: predicate is not admissible at this leaf");
  const std::size_t f = p.feature;
  const auto& dom = forest_.schema[f].domain;
  const double m = static_cast<double>(forest_.m);
  Tree& tr = forest_.trees[tree];

  HistoryEntry entry;
  entry.iteration = iteration_;
  entry.tree = tree;
  entry.leaf = leaf;
  entry.feature = f;
  entry.predicate = describe(p, forest_.schema);

  const std::vector<std::uint32_t> leaf_rows = tr[leaf].rows;
  const double leaf_u = uniform_mass(forest_.schema, tr[leaf].support);
  const double leaf_r = tr[leaf].weight / m;
  const std::size_t leaves_before = tr.leaf_count();

  auto [l, r] = tr.split_leaf(leaf, p, forest_.schema);
  tr[l].rows = filter_rows(*data_, leaf_rows, p, false);
  tr[r].rows = filter_rows(*data_, leaf_rows, p, true);
  tr[l].count = tr[l].rows.size();
  tr[r].count = tr[r].rows.size();
  tr[l].weight = total_weight(*data_, tr[l].rows, tr[l].support);
  tr[r].weight = total_weight(*data_, tr[r].rows, tr[r].support);
  const double nl = tr[l].weight;
  const double nr = tr[r].weight;
  tr[leaf].arc_prob = nr / (nl + nr);
  terminal_[tree].resize(tr.size(), false);

  const double pi = config_.prior;
  entry.wla.gamma = std::abs(nr / (nl + nr) - restriction_ratio(tr[r].support[f], tr[leaf].support[f], dom));
  entry.wla.leaf_mass = pi * leaf_r + (1 - pi) * leaf_u;
  entry.wla.kappa = pi * leaf_r / entry.wla.leaf_mass;
  entry.wla.leaf_bound = 1.0 / static_cast<double>(leaves_before);

  std::vector<Cell> next;
  next.reserve(cells_.size() + 8);
  for (auto& cell : cells_) {
    if (cell.leaves[tree] != leaf) {
      next.push_back(std::move(cell));
      continue;
    }
    const auto lp = intersect(cell.support[f], tr[l].support[f], dom);
    const auto rp = intersect(cell.support[f], tr[r].support[f], dom);
    double ph = 0.0;
    Support cl = cell.support;
    Support cr = cell.support;
    double ucl = 0;
    double ucr = 0;
    if (lp) {
      cl[f] = *lp;
      ucl = uniform_mass(forest_.schema, cl);
    }
    if (rp) {
      cr[f] = *rp;
      ucr = uniform_mass(forest_.schema, cr);
    }
    if (config_.mode == ForestMode::EOGT) {
      ph = !lp ? 1.0
           : !rp ? 0.0
                 : corrected_branch_probability(restriction_ratio(*rp, tr[r].support[f], dom),
                                                restriction_ratio(*lp, tr[l].support[f], dom), tr[leaf].arc_prob);
    }
    for (bool right : {false, true}) {
      const auto& piece = right ? rp : lp;
      if (!piece) continue;
      Cell out;
      out.rows = filter_rows(*data_, cell.rows, p, right);
      if (out.rows.empty()) continue;
      out.leaves = cell.leaves;
      out.leaves[tree] = right ? r : l;
      out.support = right ? cr : cl;
      out.u = right ? ucr : ucl;
      out.r = total_weight(*data_, out.rows, out.support) / m;
      out.rhat = config_.mode == ForestMode::GF ? out.r : cell.rhat * (right ? ph : 1 - ph);
      next.push_back(std::move(out));
    }
  }
  cells_ = std::move(next);
  ++iteration_;
  entry.poprisk = poprisk();
  history_.push_back(entry);
  return entry;
}

bool Trainer::step() {
  while (true) {
    const auto pick = pick_tree_and_leaf();
    if (!pick) return false;
    const auto candidate = split_pred(pick->first, pick->second);
    if (!candidate) {
      mark_terminal(pick->first, pick->second);
      continue;
    }
    apply(pick->first, pick->second, candidate->predicate);
    return true;
  }
}

double Trainer::poprisk() const {
  double sum = 0;
  for (const auto& c : cells_) sum += cell_score(c.r, c.u);
  return sum;
}

double Trainer::scored_poprisk() const {
  double sum = 0;
  for (const auto& c : cells_) sum += cell_score(c.rhat, c.u);
  return sum;
}

Forest Trainer::finish() const {
  Forest out = forest_;
  if (config_.mode == ForestMode::EOGT) {
    out.mode = ForestMode::EOGT;
    out.data.reset();
    for (auto& tree : out.trees) {
      for (std::size_t id = 0; id < tree.size(); ++id) tree[id].rows.clear();
    }
  }
  return out;
}

TrainResult train(std::shared_ptr<const Dataset> data, const TrainConfig& config) {
  Trainer trainer(std::move(data), config);
  TrainResult result;
  result.initial_poprisk = trainer.poprisk();
  for (std::size_t j = 0; j < config.splits; ++j) {
    if (!trainer.step()) {
      result.stopped_early = true;
      break;
    }
    ++result.splits_done;
  }
  result.forest = trainer.finish();
  result.history = trainer.history();
  return result;
}

std::string history_csv(const std::vector<HistoryEntry>& history, const Schema& schema) {
  std::ostringstream out;
  out << "iteration,tree,leaf,feature,predicate,poprisk,gamma,kappa,leaf_mass,leaf_bound\n";
  out.precision(17);
  for (const auto& h : history) {
    std::string pred;
    for (char c : h.predicate) {
      if (c == '"') pred += '"';
      pred += c;
    }
    out << h.iteration << ',' << h.tree << ',' << h.leaf << ',';
    std::string name;
    for (char c : schema[h.feature].name) {
      if (c == '"') name += '"';
      name += c;
    }
    out << '"' << name << "\",\"" << pred << "\"," << h.poprisk << ',' << h.wla.gamma << ',' << h.wla.kappa << ','
        << h.wla.leaf_mass << ',' << h.wla.leaf_bound << '\n';
  }
  return out.str();
}

}  // namespace genforest
