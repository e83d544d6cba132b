#include "genforest/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include "genforest/errors.hpp"
#include "genforest/rng.hpp"

namespace genforest {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Categorical:
      return "categorical";
    case FeatureKind::Integer:
      return "integer";
    case FeatureKind::Real:
      return "real";
  }
  return "?";
}

bool FeatureDomain::contains(double value) const {
  if (is_missing(value)) return false;
  if (is_categorical()) {
    return value >= 0 && value < static_cast<double>(modalities.size()) && value == std::floor(value);
  }
  if (kind == FeatureKind::Integer && value != std::floor(value)) return false;
  return value >= lo && value <= hi;
}

std::optional<std::size_t> FeatureDomain::modality_index(std::string_view name) const {
  auto it = std::find(modalities.begin(), modalities.end(), name);
  if (it == modalities.end()) return std::nullopt;
  return static_cast<std::size_t>(it - modalities.begin());
}

Schema::Schema(std::vector<Feature> features) : features_(std::move(features)) {
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f.name).second) throw DataError("duplicate feature name: " + f.name);
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

void Dataset::add_row(std::span<const double> values) {
  if (values.size() != dim()) throw DataError("row width does not match schema");
  values_.insert(values_.end(), values.begin(), values.end());
}

std::size_t Dataset::missing_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), is_missing));
}

Dataset Dataset::subset(std::span<const std::size_t> ids) const {
  Dataset out(schema_);
  out.reserve(ids.size());
  for (auto id : ids) out.add_row(row(id));
  return out;
}

bool Dataset::same_values(const Dataset& other) const {
  if (!(schema_ == other.schema_) || values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = values_[i];
    const double b = other.values_[i];
    if (is_missing(a) != is_missing(b)) return false;
    if (!is_missing(a) && a != b) return false;
  }
  return true;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

namespace {

using Table = std::vector<std::vector<std::string>>;

// RFC-4180 style reader: quoted fields, doubled quotes, CRLF or LF endings.
Table parse_table(std::string_view text, char delim) {
  Table rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_integer(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return false;
  out = static_cast<double>(v);
  return true;
}

bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

bool is_missing_token(const std::string& cell, const CsvOptions& options) {
  return cell.empty() || (!options.missing_token.empty() && cell == options.missing_token);
}

Table read_body(std::string_view text, const CsvOptions& options, std::vector<std::string>& header) {
  Table rows = parse_table(text, options.delimiter);
  if (rows.empty()) throw DataError("CSV has no header row");
  header = std::move(rows.front());
  rows.erase(rows.begin());
  for (auto& h : header) h = trim(h);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw DataError("ragged CSV: row " + std::to_string(r + 2) + " has " + std::to_string(rows[r].size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    for (auto& cell : rows[r]) cell = trim(cell);
  }
  return rows;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote_if_needed(const std::string& s, char delim) {
  const bool needs = s.find_first_of(std::string("\"\r\n") + delim) != std::string::npos ||
                     (!s.empty() && (s.front() == ' ' || s.back() == ' '));
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  std::vector<std::string> header;
  const Table rows = read_body(text, options, header);
  const std::size_t d = header.size();

  std::vector<Feature> features(d);
  std::vector<std::vector<double>> columns(d, std::vector<double>(rows.size(), kMissing));
  for (std::size_t j = 0; j < d; ++j) {
    features[j].name = header[j];
    bool all_integer = true;
    bool all_numeric = true;
    bool any_value = false;
    for (const auto& row : rows) {
      const auto& cell = row[j];
      if (is_missing_token(cell, options)) continue;
      any_value = true;
      double v = 0;
      if (all_integer && !parse_integer(cell, v)) all_integer = false;
      if (all_numeric && !parse_real(cell, v)) all_numeric = false;
      if (!all_numeric) break;
    }
    if (!any_value) throw DataError("column '" + header[j] + "' is entirely missing; no domain can be learned");

    FeatureDomain& dom = features[j].domain;
    if (all_numeric) {
      dom.kind = all_integer ? FeatureKind::Integer : FeatureKind::Real;
      dom.lo = std::numeric_limits<double>::infinity();
      dom.hi = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (is_missing_token(rows[r][j], options)) continue;
        double v = 0;
        if (all_integer) {
          parse_integer(rows[r][j], v);
        } else {
          parse_real(rows[r][j], v);
        }
        columns[j][r] = v;
        dom.lo = std::min(dom.lo, v);
        dom.hi = std::max(dom.hi, v);
      }
    } else {
      dom.kind = FeatureKind::Categorical;
      std::set<std::string> distinct;
      for (const auto& row : rows) {
        if (!is_missing_token(row[j], options)) distinct.insert(row[j]);
      }
      dom.modalities.assign(distinct.begin(), distinct.end());
      std::unordered_map<std::string, std::size_t> index;
      for (std::size_t k = 0; k < dom.modalities.size(); ++k) index[dom.modalities[k]] = k;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!is_missing_token(rows[r][j], options)) columns[j][r] = static_cast<double>(index[rows[r][j]]);
      }
    }
  }

  Dataset ds{Schema(std::move(features))};
  ds.reserve(rows.size());
  std::vector<double> buf(d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < d; ++j) buf[j] = columns[j][r];
    ds.add_row(buf);
  }
  return ds;
}

Dataset parse_csv(std::string_view text, const Schema& schema, const CsvOptions& options) {
  std::vector<std::string> header;
  const Table rows = read_body(text, options, header);
  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    auto it = std::find(header.begin(), header.end(), schema[f].name);
    if (it == header.end()) throw DataError("CSV lacks column '" + schema[f].name + "'");
    column_of[f] = static_cast<std::size_t>(it - header.begin());
  }
  Dataset ds(schema);
  ds.reserve(rows.size());
  std::vector<double> buf(schema.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto& cell = rows[r][column_of[f]];
      const auto& dom = schema[f].domain;
      if (is_missing_token(cell, options)) {
        buf[f] = kMissing;
      } else if (dom.is_categorical()) {
        auto k = dom.modality_index(cell);
        if (!k) throw DataError("unknown modality '" + cell + "' for feature '" + schema[f].name + "'");
        buf[f] = static_cast<double>(*k);
      } else {
        double v = 0;
        if (!parse_real(cell, v)) throw DataError("non-numeric value '" + cell + "' for feature '" + schema[f].name + "'");
        buf[f] = v;
      }
    }
    ds.add_row(buf);
  }
  return ds;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) { return parse_csv(read_file(path), options); }

Dataset load_csv(const std::string& path, const Schema& schema, const CsvOptions& options) {
  return parse_csv(read_file(path), schema, options);
}

std::string format_value(const FeatureDomain& domain, double value) {
  if (domain.is_categorical()) return domain.modalities.at(static_cast<std::size_t>(value));
  char buf[64];
  if (domain.kind == FeatureKind::Integer) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(std::llround(value)));
    return std::string(buf, p);
  }
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string to_csv(const Dataset& ds, const std::string& missing_token) {
  std::string out;
  const auto& schema = ds.schema();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (f) out += ',';
    out += quote_if_needed(schema[f].name, ',');
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (f) out += ',';
      const double v = ds.at(r, f);
      out += is_missing(v) ? missing_token : quote_if_needed(format_value(schema[f].domain, v), ',');
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& missing_token) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << to_csv(ds, missing_token);
}

std::string to_csv(const Mask& mask) {
  std::string out;
  for (std::size_t c = 0; c < mask.cols; ++c) {
    if (c) out += ',';
    out += "c" + std::to_string(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < mask.rows; ++r) {
    for (std::size_t c = 0; c < mask.cols; ++c) {
      if (c) out += ',';
      out += mask.at(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

void write_mask(const Mask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << to_csv(mask);
}

Mask load_mask(const std::string& path) {
  std::vector<std::string> header;
  const Table rows = read_body(read_file(path), CsvOptions{}, header);
  Mask mask(rows.size(), header.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& cell = rows[r][c];
      if (cell != "0" && cell != "1") throw DataError("mask cells must be 0 or 1");
      mask.set(r, c, cell == "1");
    }
  }
  return mask;
}

Dataset relearn_domains(const Dataset& ds) {
  const auto& schema = ds.schema();
  std::vector<Feature> features;
  std::vector<std::vector<double>> remap(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    Feature feat = schema[f];
    auto& dom = feat.domain;
    bool any = false;
    if (dom.is_categorical()) {
      std::vector<bool> seen(dom.cardinality(), false);
      for (std::size_t r = 0; r < ds.size(); ++r) {
        const double v = ds.at(r, f);
        if (!is_missing(v)) seen[static_cast<std::size_t>(v)] = any = true;
      }
      std::vector<std::string> kept;
      remap[f].assign(dom.cardinality(), kMissing);
      for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) continue;
        remap[f][k] = static_cast<double>(kept.size());
        kept.push_back(dom.modalities[k]);
      }
      dom.modalities = std::move(kept);
    } else {
      dom.lo = std::numeric_limits<double>::infinity();
      dom.hi = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < ds.size(); ++r) {
        const double v = ds.at(r, f);
        if (is_missing(v)) continue;
        any = true;
        dom.lo = std::min(dom.lo, v);
        dom.hi = std::max(dom.hi, v);
      }
    }
    if (!any) throw DataError("column '" + feat.name + "' is entirely missing; no domain can be learned");
    features.push_back(std::move(feat));
  }
  Dataset out{Schema(std::move(features))};
  out.reserve(ds.size());
  std::vector<double> buf(schema.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const double v = ds.at(r, f);
      buf[f] = (!is_missing(v) && schema[f].domain.is_categorical()) ? remap[f][static_cast<std::size_t>(v)] : v;
    }
    out.add_row(buf);
  }
  return out;
}

MaskedDataset apply_mcar(const Dataset& ds, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("MCAR rate must lie in [0, 1)");
  MaskedDataset out{ds, Mask(ds.size(), ds.dim())};
  if (rate == 0.0) return out;
  Rng rng(seed);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < ds.dim(); ++f) {
      const bool hit = rng.bernoulli(rate);
      if (hit && !is_missing(ds.at(r, f))) {
        out.data.at(r, f) = kMissing;
        out.mask.set(r, f, true);
      }
    }
  }
  return out;
}

namespace {

Dataset points_to_dataset(const std::vector<std::pair<double, double>>& pts) {
  FeatureDomain dx{FeatureKind::Real, {}, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  FeatureDomain dy = dx;
  for (const auto& [x, y] : pts) {
    dx.lo = std::min(dx.lo, x);
    dx.hi = std::max(dx.hi, x);
    dy.lo = std::min(dy.lo, y);
    dy.hi = std::max(dy.hi, y);
  }
  Dataset ds{Schema({{"x", dx}, {"y", dy}})};
  ds.reserve(pts.size());
  for (const auto& [x, y] : pts) {
    const double row[2] = {x, y};
    ds.add_row(row);
  }
  return ds;
}

// Component sizes summing to m with proportions drawn from a flat Dirichlet.
std::vector<std::size_t> dirichlet_sizes(std::size_t k, std::size_t m, Rng& rng) {
  std::vector<double> w(k);
  double total = 0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  std::vector<std::size_t> sizes(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(w[i] / total * static_cast<double>(m)));
    assigned += sizes[i];
  }
  for (std::size_t i = 0; assigned < m; i = (i + 1) % k, ++assigned) ++sizes[i];
  return sizes;
}

}  // namespace

std::optional<SynthDomain> synth_domain_from_name(std::string_view name) {
  if (name == "ringGauss" || name == "ring") return SynthDomain::RingGauss;
  if (name == "gridGauss" || name == "grid") return SynthDomain::GridGauss;
  if (name == "circGauss" || name == "circ") return SynthDomain::CircGauss;
  if (name == "randGauss" || name == "rand") return SynthDomain::RandGauss;
  return std::nullopt;
}

Dataset synth_domain(std::string_view name, std::uint64_t seed) {
  auto d = synth_domain_from_name(name);
  if (!d) throw std::invalid_argument("unknown synthetic domain: " + std::string(name));
  return synth_domain(*d, seed);
}

Dataset synth_domain(SynthDomain domain, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pts;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  switch (domain) {
    case SynthDomain::RingGauss: {
      // 8 modes on the unit circle, 200 points each.
      for (int k = 0; k < 8; ++k) {
        const double a = kTwoPi * k / 8.0;
        for (int i = 0; i < 200; ++i) {
          pts.emplace_back(std::cos(a) + rng.normal(0, 0.1), std::sin(a) + rng.normal(0, 0.1));
        }
      }
      break;
    }
    case SynthDomain::GridGauss: {
      // 25 modes on {-2..2}^2, component sizes drawn at random.
      const auto sizes = dirichlet_sizes(25, 2500, rng);
      for (int k = 0; k < 25; ++k) {
        const double cx = k % 5 - 2.0;
        const double cy = k / 5 - 2.0;
        for (std::size_t i = 0; i < sizes[static_cast<std::size_t>(k)]; ++i) {
          pts.emplace_back(cx + rng.normal(0, 0.1), cy + rng.normal(0, 0.1));
        }
      }
      break;
    }
    case SynthDomain::CircGauss: {
      // Central mode plus a noisy unit circle, 1100 points each.
      for (int i = 0; i < 1100; ++i) pts.emplace_back(rng.normal(0, 0.1), rng.normal(0, 0.1));
      for (int i = 0; i < 1100; ++i) {
        const double a = rng.uniform(0, kTwoPi);
        const double r = 1.0 + rng.normal(0, 0.05);
        pts.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      break;
    }
    case SynthDomain::RandGauss: {
      // 16 sightlines; radius, spread and size random per mode.
      const auto sizes = dirichlet_sizes(16, 3800, rng);
      for (int k = 0; k < 16; ++k) {
        const double a = kTwoPi * k / 16.0;
        const double radius = rng.uniform(0.5, 1.5);
        const double sigma = rng.uniform(0.05, 0.2);
        for (std::size_t i = 0; i < sizes[static_cast<std::size_t>(k)]; ++i) {
          pts.emplace_back(radius * std::cos(a) + rng.normal(0, sigma), radius * std::sin(a) + rng.normal(0, sigma));
        }
      }
      break;
    }
  }
  return points_to_dataset(pts);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace genforest
