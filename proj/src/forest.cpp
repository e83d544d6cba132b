#include "genforest/forest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "genforest/errors.hpp"

namespace genforest {

std::string_view to_string(ForestMode mode) { return mode == ForestMode::GF ? "gf" : "eogt"; }

bool SplitPredicate::test(double v, const FeatureDomain& domain) const {
  if (domain.is_categorical()) return right_set[static_cast<std::size_t>(v)];
  return strict_left ? v >= threshold : v > threshold;
}

Restriction SplitPredicate::right_restriction(const Restriction& parent, const FeatureDomain& domain) const {
  Restriction r = parent;
  if (domain.is_categorical()) {
    for (std::size_t k = 0; k < r.modalities.size(); ++k) r.modalities[k] = parent.modalities[k] && right_set[k];
    return r;
  }
  if (threshold > r.interval.lo || (threshold == r.interval.lo && !r.interval.lo_open)) {
    r.interval.lo = threshold;
    r.interval.lo_open = !strict_left;
  }
  return r;
}

Restriction SplitPredicate::left_restriction(const Restriction& parent, const FeatureDomain& domain) const {
  Restriction r = parent;
  if (domain.is_categorical()) {
    for (std::size_t k = 0; k < r.modalities.size(); ++k) r.modalities[k] = parent.modalities[k] && !right_set[k];
    return r;
  }
  if (threshold < r.interval.hi || (threshold == r.interval.hi && !r.interval.hi_open)) {
    r.interval.hi = threshold;
    r.interval.hi_open = strict_left;
  }
  return r;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

std::string describe(const SplitPredicate& p, const Schema& schema) {
  const auto& feat = schema[p.feature];
  if (feat.domain.is_categorical()) {
    std::string s = feat.name + " in {";
    bool first = true;
    for (std::size_t k = 0; k < p.right_set.size(); ++k) {
      if (!p.right_set[k]) continue;
      if (!first) s += ';';
      s += feat.domain.modalities[k];
      first = false;
    }
    return s + "}";
  }
  return feat.name + (p.strict_left ? " >= " : " > ") + format_double(p.threshold);
}

Tree::Tree(const Schema& schema) {
  Node root;
  root.support = full_support(schema);
  nodes_.push_back(std::move(root));
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::pair<int, int> Tree::split_leaf(int id, SplitPredicate predicate, const Schema& schema) {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size() || !nodes_[id].is_leaf()) {
    throw std::logic_error("split_leaf: not a leaf");
  }
  const std::size_t f = predicate.feature;
  const auto& dom = schema[f].domain;
  Node left;
  Node right;
  left.support = right.support = nodes_[id].support;
  left.support[f] = predicate.left_restriction(nodes_[id].support[f], dom);
  right.support[f] = predicate.right_restriction(nodes_[id].support[f], dom);
  if (is_empty(left.support[f], dom) || is_empty(right.support[f], dom)) {
    throw std::logic_error("split_leaf: predicate does not cut the node support");
  }
  left.parent = right.parent = id;
  left.depth = right.depth = nodes_[id].depth + 1;
  const int l = static_cast<int>(nodes_.size());
  nodes_[id].split = std::move(predicate);
  nodes_[id].left = l;
  nodes_[id].right = l + 1;
  nodes_[id].rows.clear();
  nodes_[id].rows.shrink_to_fit();
  nodes_.push_back(std::move(left));
  nodes_.push_back(std::move(right));
  return {l, l + 1};
}

std::vector<int> Tree::path_to(int id) const {
  std::vector<int> path;
  for (int v = id; v >= 0; v = nodes_[v].parent) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

int Tree::leaf_of(std::span<const double> x, const Schema& schema) const {
  int v = 0;
  while (!nodes_[v].is_leaf()) {
    const auto& p = *nodes_[v].split;
    v = p.test(x[p.feature], schema[p.feature].domain) ? nodes_[v].right : nodes_[v].left;
  }
  return v;
}

std::size_t Forest::total_splits() const {
  std::size_t n = 0;
  for (const auto& t : trees) n += (t.size() - 1) / 2;
  return n;
}

std::uint64_t dataset_hash(const Dataset& ds) { return fnv1a64(to_csv(ds)); }

Forest make_root_forest(std::shared_ptr<const Dataset> data, std::size_t trees, double prior) {
  if (!data || data->empty()) throw DataError("training requires at least one row");
  if (trees == 0) throw std::invalid_argument("a forest needs at least one tree");
  Forest forest;
  forest.schema = data->schema();
  forest.prior = prior;
  forest.mode = ForestMode::GF;
  forest.m = data->size();
  forest.data_hash = dataset_hash(*data);
  std::vector<std::uint32_t> all(data->size());
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = static_cast<std::uint32_t>(r);
  for (std::size_t t = 0; t < trees; ++t) {
    Tree tree(forest.schema);
    tree[0].count = data->size();
    tree[0].weight = static_cast<double>(data->size());
    tree[0].rows = all;
    forest.trees.push_back(std::move(tree));
  }
  forest.data = std::move(data);
  return forest;
}

std::vector<std::uint32_t> filter_rows(const Dataset& ds, std::span<const std::uint32_t> rows,
                                       const SplitPredicate& p, bool right) {
  std::vector<std::uint32_t> out;
  out.reserve(rows.size());
  const auto& dom = ds.schema()[p.feature].domain;
  for (auto r : rows) {
    const double v = ds.at(r, p.feature);
    if (is_missing(v) || p.test(v, dom) == right) out.push_back(r);
  }
  return out;
}

double right_branch_probability(const Forest& forest, const Node& node, const Tree& tree, const Support& c,
                                std::span<const std::uint32_t> rows_c) {
  const auto& p = *node.split;
  const std::size_t f = p.feature;
  const auto& dom = forest.schema[f].domain;
  const auto& right_support = tree[node.right].support;
  const auto& left_support = tree[node.left].support;
  const auto ct = intersect(c[f], right_support[f], dom);
  const auto cf = intersect(c[f], left_support[f], dom);
  if (!ct) return 0.0;
  if (!cf) return 1.0;

  if (forest.mode == ForestMode::GF) {
    // A row missing f is spread over c[f], so each side gets its uniform share.
    const double st = restriction_ratio(*ct, c[f], dom);
    const double sf = restriction_ratio(*cf, c[f], dom);
    const Dataset& ds = *forest.data;
    double wt = 0;
    double wf = 0;
    for (auto r : rows_c) {
      const auto row = ds.row(r);
      const double w = missing_share(row, c, forest.schema);
      if (is_missing(row[f])) {
        wt += w * st, wf += w * sf;
      } else if (p.test(row[f], dom)) {
        wt += w;
      } else {
        wf += w;
      }
    }
    if (wt + wf <= 0) return 0.5;  // unreachable cell; any value keeps products at zero
    return wt / (wt + wf);
  }

  // Uniform correction: only the split feature differs between C and its
  // pieces, and between the node and its children.
  const double a = restriction_ratio(*ct, right_support[f], dom);
  const double b = restriction_ratio(*cf, left_support[f], dom);
  // The other features contribute the same factor to a and b, which cancels.
  return corrected_branch_probability(a, b, node.arc_prob);
}

double corrected_branch_probability(double a, double b, double p) {
  const double den = a * p + b * (1 - p);
  if (den <= 0) return a > 0 ? 1.0 : 0.0;
  return a * p / den;
}

namespace {

class Enumerator {
 public:
  Enumerator(const Forest& forest, const PartitionOptions& options, std::vector<PartitionElement>& out)
      : forest_(forest), options_(options), out_(out), leaves_(forest.trees.size(), -1) {
    cell_ = full_support(forest.schema);
    if (options.region) {
      auto c = intersect(cell_, *options.region, forest.schema);
      if (!c) return;
      region_ = std::move(*c);
    } else {
      region_ = cell_;
    }
    std::vector<std::uint32_t> rows;
    if (forest.mode == ForestMode::GF) {
      rows.resize(forest.data->size());
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<std::uint32_t>(r);
    }
    visit(0, 0, rows, 1.0, 0);
  }

 private:
  void visit(std::size_t t, int id, const std::vector<std::uint32_t>& rows, double prob, int depth) {
    if (t == forest_.trees.size()) {
      emit(rows, prob, depth);
      return;
    }
    const Tree& tree = forest_.trees[t];
    const Node& node = tree[id];
    if (node.is_leaf()) {
      leaves_[t] = id;
      visit(t + 1, 0, rows, prob, depth + node.depth);
      return;
    }
    const std::size_t f = node.split->feature;
    const auto& dom = forest_.schema[f].domain;
    const double pr = right_branch_probability(forest_, node, tree, cell_, rows);
    for (bool right : {false, true}) {
      const Node& child = tree[right ? node.right : node.left];
      auto reg = intersect(region_[f], child.support[f], dom);
      if (!reg) continue;
      auto cell = intersect(cell_[f], child.support[f], dom);
      Restriction saved_cell = std::move(cell_[f]);
      Restriction saved_reg = std::move(region_[f]);
      cell_[f] = std::move(*cell);
      region_[f] = std::move(*reg);
      std::vector<std::uint32_t> sub;
      if (forest_.mode == ForestMode::GF) sub = filter_rows(*forest_.data, rows, *node.split, right);
      visit(t, right ? node.right : node.left, sub, prob * (right ? pr : 1 - pr), depth);
      cell_[f] = std::move(saved_cell);
      region_[f] = std::move(saved_reg);
    }
  }

  void emit(const std::vector<std::uint32_t>& rows, double prob, int depth) {
    if (out_.size() >= options_.cap) {
      throw CapacityError("partition enumeration exceeded " + std::to_string(options_.cap) + " elements");
    }
    PartitionElement e;
    e.leaves = leaves_;
    e.support = cell_;
    if (options_.region) e.restricted = region_;
    if (forest_.mode == ForestMode::GF) {
      e.count = rows.size();
      double w = 0;
      for (auto r : rows) w += missing_share(forest_.data->row(r), cell_, forest_.schema);
      e.mass = w / static_cast<double>(forest_.m);
    } else {
      e.mass = prob;
    }
    e.uniform_mass = uniform_mass(forest_.schema, cell_);
    e.depth = depth;
    e.probability = prob;
    out_.push_back(std::move(e));
  }

  const Forest& forest_;
  const PartitionOptions& options_;
  std::vector<PartitionElement>& out_;
  std::vector<int> leaves_;
  Support cell_;
  Support region_;
};

void require_trees(const Forest& forest) {
  if (forest.trees.empty()) throw std::invalid_argument("forest has no trees");
  if (forest.mode == ForestMode::GF && !forest.data) throw ModelError("GF model is not bound to its training data");
}

Support point_support(const Schema& schema, std::span<const double> x) {
  Support s = full_support(schema);
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& dom = schema[f].domain;
    if (is_missing(x[f]) || !dom.contains(x[f])) {
      throw DataError("value of feature '" + schema[f].name + "' is missing or outside its domain");
    }
    if (dom.is_categorical()) {
      s[f].modalities.assign(dom.cardinality(), false);
      s[f].modalities[static_cast<std::size_t>(x[f])] = true;
    } else {
      s[f].interval = Interval{x[f], x[f], false, false};
    }
  }
  return s;
}

}  // namespace

std::vector<PartitionElement> enumerate_partition(const Forest& forest, const PartitionOptions& options) {
  require_trees(forest);
  std::vector<PartitionElement> out;
  Enumerator(forest, options, out);
  return out;
}

PartitionElement partition_element_of(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.schema.size()) throw DataError("observation width does not match schema");
  PartitionOptions options;
  options.region = point_support(forest.schema, x);
  auto elements = enumerate_partition(forest, options);
  if (elements.size() != 1) throw std::logic_error("point location did not return a unique cell");
  return std::move(elements.front());
}

Density density(const Forest& forest, std::span<const double> x) {
  const auto e = partition_element_of(forest, x);
  const double vol = volume(forest.schema, e.support);
  if (vol <= 0) return {e.probability, true};
  return {e.probability / vol, false};
}

Forest to_eogt(const Forest& forest) {
  if (forest.mode == ForestMode::EOGT) return forest;
  require_trees(forest);
  Forest out = forest;
  const Dataset& ds = *forest.data;
  for (auto& tree : out.trees) {
    for (std::size_t id = 0; id < tree.size(); ++id) {
      Node& node = tree[id];
      node.count = compatible_count(ds, node.support);
      node.rows.clear();
      if (node.is_leaf()) continue;
      const double nl = empirical_mass(ds, tree[node.left].support);
      const double nr = empirical_mass(ds, tree[node.right].support);
      if (nl + nr <= 0) throw std::logic_error("internal node with zero empirical mass");
      node.arc_prob = nr / (nl + nr);
    }
  }
  out.mode = ForestMode::EOGT;
  out.data.reset();
  return out;
}

double expected_depth(const Forest& forest, std::size_t cap) {
  PartitionOptions options;
  options.cap = cap;
  double sum = 0;
  for (const auto& e : enumerate_partition(forest, options)) sum += e.probability * e.depth;
  return sum;
}

double poprisk(const Forest& forest, const Loss& loss, double pi, std::size_t cap) {
  PartitionOptions options;
  options.cap = cap;
  double sum = 0;
  for (const auto& e : enumerate_partition(forest, options)) sum += cell_risk(loss, pi, e.mass, e.uniform_mass);
  return sum;
}

double poprisk_by_leaves(const Forest& forest, const Loss& loss, double pi, std::size_t tree, std::size_t cap) {
  PartitionOptions options;
  options.cap = cap;
  std::map<int, double> per_leaf;
  for (const auto& e : enumerate_partition(forest, options)) {
    per_leaf[e.leaves.at(tree)] += cell_risk(loss, pi, e.mass, e.uniform_mass);
  }
  double sum = 0;
  for (const auto& [leaf, v] : per_leaf) sum += v;
  return sum;
}

// Model file layout, one record per line:
//   genforest-model 1
//   mode gf|eogt
//   prior <pi>
//   features <d>
//   feature <name> real|integer <lo> <hi>
//   feature <name> categorical <k> <modality>...
//   data <m> <hash> <source>
//   trees <T>
//   tree <node count>
//   split <id> <left> <right> <feature> num <threshold> <strict> <arc_prob> <count>
//   split <id> <left> <right> <feature> cat <0/1 flags> <arc_prob> <count>
//   leaf <id> <count> [<row>...]          (rows listed for GF only)
//   end
// Names are written with std::quoted.

namespace {

constexpr std::string_view kMagic = "genforest-model";
constexpr int kVersion = 1;

std::string quoted(const std::string& s) {
  std::ostringstream ss;
  ss << std::quoted(s);
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, p);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::istringstream& line(std::string_view expected) {
    std::string raw;
    do {
      if (!std::getline(in_, raw)) throw ModelError("model file truncated; expected '" + std::string(expected) + "'");
      ++line_no_;
    } while (raw.empty());
    current_.clear();
    current_.str(raw);
    std::string key;
    current_ >> key;
    if (key != expected) fail("expected '" + std::string(expected) + "', found '" + key + "'");
    return current_;
  }

  // Next non-empty line; returns its first token.
  std::string any_line() {
    std::string raw;
    do {
      if (!std::getline(in_, raw)) throw ModelError("model file truncated");
      ++line_no_;
    } while (raw.empty());
    current_.clear();
    current_.str(raw);
    std::string key;
    current_ >> key;
    return key;
  }

  // Steps back over the token consumed by a successful at_end() probe.
  void unget() {
    current_.clear();
    current_.seekg(last_pos_);
  }

  std::string word() {
    std::string w;
    if (!(current_ >> w)) fail("missing field");
    return w;
  }

  std::string name() {
    std::string w;
    if (!(current_ >> std::quoted(w))) fail("missing quoted field");
    return w;
  }

  double number() {
    const std::string w = word();
    double v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size()) fail("bad number '" + w + "'");
    return v;
  }

  std::uint64_t integer(int base = 10) {
    const std::string w = word();
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v, base);
    if (ec != std::errc() || p != w.data() + w.size()) fail("bad integer '" + w + "'");
    return v;
  }

  bool at_end() {
    last_pos_ = current_.tellg();
    std::string rest;
    return !(current_ >> rest);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ModelError("model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istringstream in_;
  std::istringstream current_;
  std::size_t line_no_ = 0;
  std::streampos last_pos_{};
};

struct Header {
  ForestMode mode = ForestMode::GF;
  double prior = 0.5;
  Schema schema;
  std::size_t m = 0;
  std::uint64_t hash = 0;
  std::string source;
};

Header read_header(Reader& rd) {
  Header h;
  rd.line(kMagic);
  if (rd.integer() != kVersion) rd.fail("unsupported model version");
  rd.line("mode");
  const auto mode = rd.word();
  if (mode == "gf") {
    h.mode = ForestMode::GF;
  } else if (mode == "eogt") {
    h.mode = ForestMode::EOGT;
  } else {
    rd.fail("unknown mode '" + mode + "'");
  }
  rd.line("prior");
  h.prior = rd.number();
  if (!(h.prior > 0 && h.prior < 1)) rd.fail("prior outside (0, 1)");
  rd.line("features");
  const auto d = rd.integer();
  std::vector<Feature> features;
  for (std::uint64_t f = 0; f < d; ++f) {
    rd.line("feature");
    Feature feat;
    feat.name = rd.name();
    const auto kind = rd.word();
    if (kind == "categorical") {
      feat.domain.kind = FeatureKind::Categorical;
      const auto k = rd.integer();
      for (std::uint64_t i = 0; i < k; ++i) feat.domain.modalities.push_back(rd.name());
      if (k == 0) rd.fail("categorical feature without modalities");
    } else if (kind == "real" || kind == "integer") {
      feat.domain.kind = kind == "real" ? FeatureKind::Real : FeatureKind::Integer;
      feat.domain.lo = rd.number();
      feat.domain.hi = rd.number();
      if (!(feat.domain.lo <= feat.domain.hi)) rd.fail("numeric domain with lo > hi");
    } else {
      rd.fail("unknown feature kind '" + kind + "'");
    }
    features.push_back(std::move(feat));
  }
  try {
    h.schema = Schema(std::move(features));
  } catch (const DataError& e) {
    rd.fail(e.what());
  }
  rd.line("data");
  h.m = rd.integer();
  h.hash = rd.integer(16);
  h.source = rd.name();
  return h;
}

}  // namespace

std::string to_text(const Forest& forest) {
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  out << "mode " << to_string(forest.mode) << '\n';
  out << "prior " << format_double(forest.prior) << '\n';
  out << "features " << forest.schema.size() << '\n';
  for (const auto& feat : forest.schema.features()) {
    out << "feature " << quoted(feat.name) << ' ' << to_string(feat.domain.kind);
    if (feat.domain.is_categorical()) {
      out << ' ' << feat.domain.cardinality();
      for (const auto& mod : feat.domain.modalities) out << ' ' << quoted(mod);
    } else {
      out << ' ' << format_double(feat.domain.lo) << ' ' << format_double(feat.domain.hi);
    }
    out << '\n';
  }
  out << "data " << forest.m << ' ' << hex64(forest.data_hash) << ' ' << quoted(forest.data_source) << '\n';
  out << "trees " << forest.trees.size() << '\n';
  for (const auto& tree : forest.trees) {
    out << "tree " << tree.size() << '\n';
    for (std::size_t id = 0; id < tree.size(); ++id) {
      const Node& n = tree[id];
      if (n.is_leaf()) {
        out << "leaf " << id << ' ' << n.count;
        if (forest.mode == ForestMode::GF) {
          for (auto r : n.rows) out << ' ' << r;
        }
      } else {
        const auto& p = *n.split;
        out << "split " << id << ' ' << n.left << ' ' << n.right << ' ' << p.feature;
        if (forest.schema[p.feature].domain.is_categorical()) {
          out << " cat ";
          for (bool b : p.right_set) out << (b ? '1' : '0');
        } else {
          out << " num " << format_double(p.threshold) << ' ' << (p.strict_left ? 1 : 0);
        }
        out << ' ' << format_double(n.arc_prob) << ' ' << n.count;
      }
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

void save_forest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << to_text(forest);
}

Forest from_text(const std::string& text, std::shared_ptr<const Dataset> data) {
  Reader rd(text);
  Header h = read_header(rd);
  Forest forest;
  forest.schema = h.schema;
  forest.prior = h.prior;
  forest.mode = h.mode;
  forest.m = h.m;
  forest.data_hash = h.hash;
  forest.data_source = h.source;
  if (forest.mode == ForestMode::GF) {
    if (!data) throw ModelError("a GF model needs its training data");
    if (!(data->schema() == forest.schema)) throw ModelError("training data schema does not match the model");
    if (data->size() != forest.m || dataset_hash(*data) != forest.data_hash) {
      throw ModelError("training data hash mismatch: the dataset changed since the model was trained");
    }
    forest.data = std::move(data);
  }

  rd.line("trees");
  const auto trees = rd.integer();
  if (trees == 0) rd.fail("model has no trees");
  for (std::uint64_t t = 0; t < trees; ++t) {
    rd.line("tree");
    const auto size = rd.integer();
    if (size == 0 || size % 2 == 0) rd.fail("a binary tree has an odd number of nodes");
    struct Record {
      bool leaf = true;
      int left = -1;
      SplitPredicate split;
      double arc_prob = 0;
      std::size_t count = 0;
      std::vector<std::uint32_t> rows;
    };
    std::vector<Record> records(size);
    for (std::uint64_t i = 0; i < size; ++i) {
      const std::string kind = rd.any_line();
      if (rd.integer() != i) rd.fail("node ids must be listed in order");
      Record& rec = records[i];
      if (kind == "leaf") {
        rec.count = rd.integer();
        if (forest.mode == ForestMode::GF) {
          while (!rd.at_end()) {
            rd.unget();
            const auto r = rd.integer();
            if (r >= forest.m) rd.fail("leaf row index out of range");
            rec.rows.push_back(static_cast<std::uint32_t>(r));
          }
          if (!std::is_sorted(rec.rows.begin(), rec.rows.end())) rd.fail("leaf rows must be sorted");
        }
      } else if (kind == "split") {
        rec.leaf = false;
        rec.left = static_cast<int>(rd.integer());
        const auto right = rd.integer();
        if (right != static_cast<std::uint64_t>(rec.left) + 1) rd.fail("children must have consecutive ids");
        rec.split.feature = rd.integer();
        if (rec.split.feature >= forest.schema.size()) rd.fail("split feature out of range");
        const auto& dom = forest.schema[rec.split.feature].domain;
        const auto form = rd.word();
        if (form == "cat" && dom.is_categorical()) {
          const auto flags = rd.word();
          if (flags.size() != dom.cardinality()) rd.fail("categorical split has the wrong width");
          for (char c : flags) rec.split.right_set.push_back(c == '1');
        } else if (form == "num" && dom.is_numeric()) {
          rec.split.threshold = rd.number();
          rec.split.strict_left = rd.integer() != 0;
        } else {
          rd.fail("split form does not match the feature kind");
        }
        rec.arc_prob = rd.number();
        if (!(rec.arc_prob >= 0 && rec.arc_prob <= 1)) rd.fail("arc probability outside [0, 1]");
        rec.count = rd.integer();
      } else {
        rd.fail("expected 'split' or 'leaf', found '" + kind + "'");
      }
    }

    // Children were created in split order, so replaying the splits sorted
    // by left-child id rebuilds identical ids and supports.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].leaf) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return records[a].left < records[b].left; });
    Tree tree(forest.schema);
    for (auto i : order) {
      std::pair<int, int> ids;
      try {
        ids = tree.split_leaf(static_cast<int>(i), records[i].split, forest.schema);
      } catch (const std::logic_error& e) {
        rd.fail(std::string("inconsistent tree: ") + e.what());
      }
      if (ids.first != records[i].left) rd.fail("inconsistent child ids");
    }
    if (tree.size() != records.size()) rd.fail("tree node count mismatch");
    for (std::size_t i = 0; i < records.size(); ++i) {
      tree[i].count = records[i].count;
      tree[i].arc_prob = records[i].arc_prob;
      tree[i].rows = std::move(records[i].rows);
    }
    forest.trees.push_back(std::move(tree));
  }
  rd.line("end");
  return forest;
}

namespace {

std::string read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Forest load_forest(const std::string& path, std::shared_ptr<const Dataset> data) {
  return from_text(read_model_file(path), std::move(data));
}

ModelHeader peek_model(const std::string& path) {
  Reader rd(read_model_file(path));
  Header h = read_header(rd);
  return ModelHeader{h.mode, std::move(h.schema), std::move(h.source)};
}

}  // namespace genforest
