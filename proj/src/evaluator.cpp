#include "genforest/evaluator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "genforest/errors.hpp"
#include "genforest/parallel.hpp"
#include "genforest/rng.hpp"
#include "genforest/sampler.hpp"

namespace genforest {

namespace {

void check_shapes(const Dataset& imputed, const Dataset& truth, const Mask& mask) {
  if (imputed.size() != truth.size() || imputed.dim() != truth.dim() || mask.rows != truth.size() ||
      mask.cols != truth.dim()) {
    throw DataError("imputed data, truth and mask must have the same shape");
  }
}

}  // namespace

std::optional<double> perr(const Dataset& imputed, const Dataset& truth, const Mask& mask) {
  check_shapes(imputed, truth, mask);
  std::size_t cells = 0;
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    for (std::size_t f = 0; f < truth.dim(); ++f) {
      if (!mask.at(r, f) || !truth.schema()[f].domain.is_categorical()) continue;
      ++cells;
      if (imputed.at(r, f) != truth.at(r, f)) ++wrong;
    }
  }
  if (cells == 0) return std::nullopt;
  return static_cast<double>(wrong) / static_cast<double>(cells);
}

std::optional<double> rmse(const Dataset& imputed, const Dataset& truth, const Mask& mask) {
  check_shapes(imputed, truth, mask);
  std::size_t cells = 0;
  double sum = 0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    for (std::size_t f = 0; f < truth.dim(); ++f) {
      if (!mask.at(r, f) || !truth.schema()[f].domain.is_numeric()) continue;
      ++cells;
      const double e = imputed.at(r, f) - truth.at(r, f);
      sum += e * e;
    }
  }
  if (cells == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(cells));
}

FeatureStats feature_stats(const Dataset& ds) {
  const std::size_t d = ds.dim();
  FeatureStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t f = 0; f < d; ++f) {
    if (ds.schema()[f].domain.is_categorical()) continue;
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (!is_missing(ds.at(r, f))) sum += ds.at(r, f), ++n;
    }
    if (n == 0) continue;
    s.mean[f] = sum / static_cast<double>(n);
    double ss = 0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (!is_missing(ds.at(r, f))) ss += (ds.at(r, f) - s.mean[f]) * (ds.at(r, f) - s.mean[f]);
    }
    s.sd[f] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  return s;
}

OtResult sinkhorn_ot(const Dataset& a, const Dataset& b, const FeatureStats& stats, const OtOptions& options) {
  if (!(options.eps > 0)) throw std::invalid_argument("Sinkhorn regularization must be positive");
  if (a.dim() != b.dim()) throw DataError("OT needs datasets with the same features");
  if (a.empty() || b.empty()) throw DataError("OT needs non-empty datasets");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t d = a.dim();
  const Schema& schema = a.schema();

  std::vector<double> cost(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double c = 0;
      for (std::size_t f = 0; f < d; ++f) {
        const double x = a.at(i, f);
        const double y = b.at(j, f);
        if (is_missing(x) || is_missing(y)) continue;
        if (schema[f].domain.is_categorical()) {
          c += x != y ? 1.0 : 0.0;
        } else if (stats.sd[f] > 0) {
          const double diff = std::abs(x - y) / stats.sd[f];
          c += options.ground == GroundCost::L1 ? diff : diff * diff;
        }
      }
      cost[i * m + j] = c;
    }
  }

  const double eps = options.eps;
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0);
  std::vector<double> g(m, 0.0);
  std::vector<double> buf(std::max(n, m));

  auto logsumexp = [](const std::vector<double>& v, std::size_t len) {
    const double mx = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(len));
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += std::exp(v[i] - mx);
    return mx + std::log(s);
  };

  OtResult result;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) buf[j] = (g[j] - cost[i * m + j]) / eps;
      f[i] = eps * log_a - eps * logsumexp(buf, m);
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - cost[i * m + j]) / eps;
      g[j] = eps * log_b - eps * logsumexp(buf, n);
    }
    double violation = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < m; ++j) row += std::exp((f[i] + g[j] - cost[i * m + j]) / eps);
      violation += std::abs(row - std::exp(log_a));
    }
    result.iterations = it;
    if (violation < options.tolerance) {
      result.converged = true;
      break;
    }
  }

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      total += std::exp((f[i] + g[j] - cost[i * m + j]) / eps) * cost[i * m + j];
    }
  }
  result.cost = total;
  return result;
}

Dataset conform(const Dataset& ds, const Schema& target) {
  const Schema& src = ds.schema();
  if (src.size() != target.size()) throw DataError("cannot conform datasets of different widths");
  std::vector<std::vector<double>> remap(src.size());
  for (std::size_t f = 0; f < src.size(); ++f) {
    if (src[f].name != target[f].name || src[f].domain.kind != target[f].domain.kind) {
      throw DataError("cannot conform feature '" + src[f].name + "'");
    }
    if (!src[f].domain.is_categorical()) continue;
    for (const auto& mod : src[f].domain.modalities) {
      const auto k = target[f].domain.modality_index(mod);
      if (!k) throw DataError("modality '" + mod + "' is unknown to the target schema");
      remap[f].push_back(static_cast<double>(*k));
    }
  }
  Dataset out(target);
  out.reserve(ds.size());
  std::vector<double> row(src.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < src.size(); ++f) {
      const double v = ds.at(r, f);
      row[f] = (!is_missing(v) && src[f].domain.is_categorical()) ? remap[f][static_cast<std::size_t>(v)] : v;
    }
    out.add_row(row);
  }
  return out;
}

std::vector<std::size_t> fold_assignment(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("at least two folds are required");
  if (ds.size() < k) throw DataError("fewer rows than folds");
  std::optional<std::size_t> strat;
  for (std::size_t f = 0; f < ds.dim(); ++f) {
    if (ds.schema()[f].domain.is_categorical()) strat = f;
  }
  // Groups keyed by class (missing class last); one group without stratification.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    double key = 0;
    if (strat) key = is_missing(ds.at(r, *strat)) ? std::numeric_limits<double>::infinity() : ds.at(r, *strat);
    groups[key].push_back(r);
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(ds.size(), 0);
  std::size_t next = 0;
  for (auto& [key, rows] : groups) {
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    for (auto r : rows) fold[r] = next++ % k;
  }
  return fold;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

LifelikeResult kfold_lifelike(const Dataset& ds, const LifelikeConfig& config) {
  const auto fold = fold_assignment(ds, config.folds, config.seed);
  const FeatureStats stats = feature_stats(ds);
  LifelikeResult result;
  result.folds.resize(config.folds);

  parallel_for(config.folds, config.threads, [&](std::size_t k) {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> test_ids;
    for (std::size_t r = 0; r < ds.size(); ++r) (fold[r] == k ? test_ids : train_ids).push_back(r);
    if (test_ids.empty() || train_ids.empty()) throw DataError("fold too small");
    const Dataset test = ds.subset(test_ids);
    auto train_ds = std::make_shared<const Dataset>(relearn_domains(ds.subset(train_ids)));

    TrainConfig tc = config.train;
    tc.seed = Rng::mix(config.train.seed ^ Rng::mix(k));
    tc.threads = 1;
    const auto model = train(train_ds, tc);

    const std::uint64_t fold_seed = Rng::mix(config.seed + 0x9e37 * (k + 1));
    const Dataset generated = conform(generate(model.forest, test.size(), fold_seed), ds.schema());

    Rng rng = Rng::stream(fold_seed, 1);
    std::vector<std::size_t> order(train_ds->size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<std::size_t> copy_ids;
    for (std::size_t i = 0; i < test.size(); ++i) copy_ids.push_back(order[i % order.size()]);
    const Dataset copy = conform(train_ds->subset(copy_ids), ds.schema());

    Dataset noise(train_ds->schema());
    const Support full = full_support(train_ds->schema());
    for (std::size_t i = 0; i < test.size(); ++i) noise.add_row(draw_uniform(full, train_ds->schema(), rng));
    const Dataset uniform = conform(noise, ds.schema());

    FoldResult& fr = result.folds[k];
    fr.fold = k;
    fr.train_rows = train_ids.size();
    fr.test_rows = test_ids.size();
    fr.model = sinkhorn_ot(generated, test, stats, config.ot);
    fr.copy = sinkhorn_ot(copy, test, stats, config.ot);
    fr.uniform = sinkhorn_ot(uniform, test, stats, config.ot);
  });

  std::vector<double> model;
  std::vector<double> copy;
  std::vector<double> uniform;
  for (const auto& fr : result.folds) {
    model.push_back(fr.model.cost);
    copy.push_back(fr.copy.cost);
    uniform.push_back(fr.uniform.cost);
  }
  result.model = summarize(model);
  result.copy = summarize(copy);
  result.uniform = summarize(uniform);
  return result;
}

std::string lifelike_csv(const LifelikeResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << "fold,train_rows,test_rows,model,copy,uniform,warnings\n";
  for (const auto& fr : result.folds) {
    std::string warn;
    auto note = [&](const OtResult& r, const char* name) {
      if (r.converged) return;
      if (!warn.empty()) warn += ';';
      warn += std::string(name) + " not converged";
    };
    note(fr.model, "model");
    note(fr.copy, "copy");
    note(fr.uniform, "uniform");
    out << fr.fold << ',' << fr.train_rows << ',' << fr.test_rows << ',' << fr.model.cost << ',' << fr.copy.cost << ','
        << fr.uniform.cost << ',' << warn << '\n';
  }
  out << "mean,,," << result.model.mean << ',' << result.copy.mean << ',' << result.uniform.mean << ",\n";
  out << "sd,,," << result.model.sd << ',' << result.copy.sd << ',' << result.uniform.sd << ",\n";
  return out.str();
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs two samples of size >= 2");
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const double va = sa.sd * sa.sd / static_cast<double>(a.size());
  const double vb = sb.sd * sb.sd / static_cast<double>(b.size());
  WelchResult w;
  if (va + vb == 0) {
    w.t = sa.mean == sb.mean ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), sa.mean - sb.mean);
    w.df = static_cast<double>(a.size() + b.size() - 2);
    w.p_value = sa.mean == sb.mean ? 1.0 : 0.0;
    return w;
  }
  w.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  w.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(w.df);
  w.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(w.t)));
  return w;
}

}  // namespace genforest
