#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "genforest/sampler.hpp"

using namespace genforest;

namespace {

double chi2_critical(double df, double alpha) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(df), alpha));
}

// Pearson goodness of fit of observed leaf-tuple counts to probabilities.
double chi2_fit(const std::map<std::vector<int>, double>& expected_p, const std::map<std::vector<int>, int>& observed,
                int n) {
  double stat = 0;
  for (const auto& [k, p] : expected_p) {
    const double want = p * n;
    const auto it = observed.find(k);
    const double got = it == observed.end() ? 0 : it->second;
    stat += (got - want) * (got - want) / want;
  }
  return stat;
}

std::shared_ptr<const Dataset> four_points() { return std::make_shared<const Dataset>(parse_csv("x\n1.0\n2.0\n3.0\n4.0\n")); }

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("init_sampling") {
    TrainConfig cfg;
    cfg.trees = 3;
    const Forest roots = Trainer(fixture::toy8(), cfg).finish();
    CHECK(init_sampling(roots).all_done());
    const auto f = fixture::toy8_forest();
    const auto s = init_sampling(f);
    CHECK(!s.all_done());
    CHECK(s.star == std::vector<int>{0, 0});
    CHECK(s.support == full_support(f.schema));
    CHECK(s.rows.size() == 8);
  }

  TEST_CASE("hand trace of branch probabilities on the toy forest") {
    // Tree 0: x > 3, then y > 1 on its left child. Tree 1: y > 2.
    const auto f = fixture::toy8_forest();
    auto s = init_sampling(f);
    CHECK(head_probability(f, 0, s) == doctest::Approx(0.5));
    CHECK(star_step(f, 0, s, false) == doctest::Approx(0.5));
    CHECK(head_probability(f, 0, s) == doctest::Approx(0.25));  // y > 1 among x <= 3: one of four
    CHECK(star_step(f, 0, s, false) == doctest::Approx(0.75));
    CHECK(s.done[0]);
    // y <= 1 lies inside tree 1's left child: deterministic descent.
    CHECK(head_probability(f, 1, s) == 0.0);
    CHECK(star_step(f, 1, s, false) == 1.0);
    CHECK(s.all_done());

    auto z = init_sampling(f);
    star_step(f, 0, z, false);
    star_step(f, 0, z, true);  // x <= 3, y > 1: only the row (2, 3)
    // y <= 2 is possible in the support but holds no row.
    CHECK(head_probability(f, 1, z) == 1.0);
  }

  TEST_CASE("stump with counts 3 and 1") {
    TrainConfig cfg;
    Trainer tr(four_points(), cfg);
    tr.apply(0, 0, fixture::numeric(0, 3.0));
    const auto f = tr.finish();
    const int right[] = {f.trees[0][0].right};
    const std::size_t steps[] = {0};
    CHECK(sequence_probability(f, right, steps) == 0.25);
    Rng rng(3);
    int hits = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) hits += iterative_update_support(f, rng).star[0] == f.trees[0][0].right ? 1 : 0;
    CHECK(std::abs(hits / static_cast<double>(n) - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / n));
  }

  TEST_CASE("sequence probabilities equal the row-filter oracle") {
    gen::Engine e(21);
    for (int i = 0; i < 15; ++i) {
      const auto data = gen::random_dataset(e, 2 + gen::below(e, 2), 30);
      const auto f = gen::random_forest(e, data, 2 + gen::below(e, 2), 5);
      for (const auto& el : enumerate_partition(f)) {
        const auto order = oracle::iterative_order(f, el.leaves);
        const double want = oracle::gf_sequence_probability(f, *data, oracle::steps_for(f, el.leaves, order));
        CHECK(std::abs(sequence_probability(f, el.leaves, order) - want) <= 1e-12);
        CHECK(std::abs(el.probability - static_cast<double>(*el.count) / 30.0) <= 1e-12);
      }
    }
  }

  TEST_CASE("every admissible order gives the same probability") {
    gen::Engine e(22);
    for (int i = 0; i < 6; ++i) {
      const auto data = gen::random_dataset(e, 2, 25);
      const auto f = gen::random_forest(e, data, 2, 4);
      for (const auto& el : enumerate_partition(f)) {
        const double want = static_cast<double>(*el.count) / 25.0;
        for (const auto& order : oracle::all_orders(oracle::iterative_order(f, el.leaves))) {
          CHECK(std::abs(sequence_probability(f, el.leaves, order) - want) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("EOGT sequence probabilities equal the corrected-coin oracle") {
    gen::Engine e(23);
    for (int i = 0; i < 10; ++i) {
      const auto data = gen::random_dataset(e, 2, 30);
      const auto eg = to_eogt(gen::random_forest(e, data, 2, 5));
      for (const auto& el : enumerate_partition(eg)) {
        const auto order = oracle::iterative_order(eg, el.leaves);
        const double want = oracle::eogt_sequence_probability(eg, *data, oracle::steps_for(eg, el.leaves, order));
        CHECK(std::abs(el.probability - want) <= 1e-12);
      }
    }
  }

  TEST_CASE("inadmissible sequences are rejected") {
    const auto f = fixture::toy8_forest();
    const int leaves[] = {f.trees[0][0].right, f.trees[1][0].right};
    const std::size_t too_many[] = {0, 0, 1};
    CHECK_THROWS_AS(sequence_probability(f, leaves, too_many), std::invalid_argument);
    const int internal[] = {0, f.trees[1][0].right};
    const std::size_t steps[] = {1};
    CHECK_THROWS_AS(sequence_probability(f, internal, steps), std::invalid_argument);
  }

  TEST_CASE("running support stays inside every star node") {
    gen::Engine e(24);
    for (int i = 0; i < 10; ++i) {
      const auto f = gen::random_forest(e, gen::random_dataset(e, 3, 40), 3, 9);
      Rng rng(i);
      for (int draw = 0; draw < 50; ++draw) {
        auto s = init_sampling(f);
        while (!s.all_done()) {
          const std::size_t t = rng.index(f.trees.size());
          if (s.done[t]) continue;
          star_update(f, t, s, rng);
          for (std::size_t k = 0; k < f.trees.size(); ++k) {
            CHECK(is_subset(s.support, f.trees[k][s.star[k]].support, f.schema));
          }
        }
      }
    }
  }

  TEST_CASE("iterative draws follow the empirical cell masses") {
    const auto f = fixture::toy8_forest();
    std::map<std::vector<int>, double> p;
    for (const auto& el : enumerate_partition(f)) {
      if (*el.count > 0) p[el.leaves] = *el.count / 8.0;
    }
    Rng rng(31);
    std::map<std::vector<int>, int> seen;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++seen[iterative_update_support(f, rng).star];
    for (const auto& [k, c] : seen) CHECK(p.count(k) == 1);
    CHECK(chi2_fit(p, seen, n) < chi2_critical(static_cast<double>(p.size() - 1), 0.001));
  }

  TEST_CASE("randomized and iterative orders agree in law") {
    const auto f = fixture::toy8_forest();
    Rng a(41);
    Rng b(42);
    std::map<std::vector<int>, std::pair<int, int>> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      ++counts[iterative_update_support(f, a).star].first;
      ++counts[randomized_update_support(f, b).star].second;
    }
    // Two-sample chi-square homogeneity test.
    double stat = 0;
    for (const auto& [k, c] : counts) {
      const double tot = c.first + c.second;
      const double e1 = tot / 2;
      stat += (c.first - e1) * (c.first - e1) / e1 + (c.second - e1) * (c.second - e1) / e1;
    }
    CHECK(stat < chi2_critical(static_cast<double>(counts.size() - 1), 0.001));
  }

  TEST_CASE("randomized draws follow the empirical cell masses") {
    gen::Engine e(25);
    const auto data = gen::random_dataset(e, 2, 40);
    const auto f = gen::random_forest(e, data, 3, 6);
    std::map<std::vector<int>, double> p;
    for (const auto& el : enumerate_partition(f)) {
      if (*el.count > 0) p[el.leaves] = *el.count / 40.0;
    }
    Rng rng(8);
    std::map<std::vector<int>, int> seen;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++seen[randomized_update_support(f, rng).star];
    for (const auto& [k, c] : seen) CHECK(p.count(k) == 1);
    CHECK(chi2_fit(p, seen, n) < chi2_critical(static_cast<double>(p.size() - 1), 0.001));
  }

  TEST_CASE("draw_uniform") {
    const auto ds = parse_csv("x,c,y\n0.0,a,0.0\n10.0,b,1.0\n");
    Support s = full_support(ds.schema());
    s[0].interval = Interval{3, 10, true, false};
    s[1].modalities = {false, true};
    Rng rng(5);
    const int n = 100000;
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      const auto x = draw_uniform(s, ds.schema(), rng);
      CHECK(x[1] == 1.0);
      CHECK(x[0] > 3.0);
      CHECK(x[0] <= 10.0);
      sx += x[0], sy += x[2], sxy += x[0] * x[2], sxx += x[0] * x[0], syy += x[2] * x[2];
    }
    const double mx = sx / n;
    const double my = sy / n;
    CHECK(std::abs(mx - 6.5) <= 3 * (7 / std::sqrt(12.0)) / std::sqrt(n));
    const double corr = (sxy / n - mx * my) / std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
    CHECK(std::abs(corr) <= 3 / std::sqrt(n));
  }

  TEST_CASE("draw_uniform on integers hits every value") {
    const auto ds = parse_csv("n\n0\n5\n");
    Support s = full_support(ds.schema());
    s[0].interval = Interval{1, 4, true, false};
    Rng rng(6);
    std::map<double, int> seen;
    for (int i = 0; i < 4000; ++i) ++seen[draw_uniform(s, ds.schema(), rng)[0]];
    CHECK(seen.size() == 3);
    CHECK(seen.begin()->first == 2.0);
    CHECK(seen.rbegin()->first == 4.0);
  }

  TEST_CASE("root-only forest generates uniform data") {
    const auto data = std::make_shared<const Dataset>(parse_csv("x,y\n0.0,0.0\n1.0,1.0\n"));
    TrainConfig cfg;
    const auto f = Trainer(data, cfg).finish();
    const std::size_t n = 2000;
    const auto out = generate(f, n, 9);
    REQUIRE(out.size() == n);
    for (std::size_t col = 0; col < 2; ++col) {
      std::vector<double> v;
      for (std::size_t r = 0; r < n; ++r) v.push_back(out.at(r, col));
      std::sort(v.begin(), v.end());
      double d = 0;
      for (std::size_t i = 0; i < n; ++i) {
        d = std::max({d, std::abs((i + 1.0) / n - v[i]), std::abs(v[i] - static_cast<double>(i) / n)});
      }
      CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
    }
  }

  TEST_CASE("generate: empty, deterministic, prefix-stable and thread-independent") {
    const auto f = fixture::toy8_forest();
    const auto none = generate(f, 0, 1);
    CHECK(none.size() == 0);
    CHECK(none.schema() == f.schema);
    const auto a = generate(f, 300, 5);
    const auto b = generate(f, 300, 5);
    CHECK(a.same_values(b));
    const auto prefix = generate(f, 100, 5);
    for (std::size_t r = 0; r < 100; ++r) {
      for (std::size_t c = 0; c < 2; ++c) CHECK(prefix.at(r, c) == a.at(r, c));
    }
    GenerateOptions opt;
    opt.threads = 8;
    CHECK(generate(f, 300, 5, opt).same_values(a));
    CHECK(!generate(f, 300, 6).same_values(a));
  }

  TEST_CASE("generated GF rows land in cells with training rows") {
    gen::Engine e(26);
    for (int i = 0; i < 5; ++i) {
      const auto data = gen::random_dataset(e, 3, 40);
      const auto f = gen::random_forest(e, data, 3, 8);
      const auto out = generate(f, 500, static_cast<std::uint64_t>(i));
      for (std::size_t r = 0; r < out.size(); ++r) CHECK(*partition_element_of(f, out.row(r)).count >= 1);
    }
  }

  TEST_CASE("KL divergence of a one-tree GF and its EOGT is zero") {
    gen::Engine e(27);
    const auto f = gen::random_forest(e, gen::random_dataset(e, 2, 40), 1, 6);
    CHECK(std::abs(kl_divergence(f, to_eogt(f))) <= 1e-12);
  }

  TEST_CASE("realized kappa matches the oracle") {
    gen::Engine e(28);
    int finite = 0;
    for (int i = 0; i < 15; ++i) {
      const auto data = gen::random_dataset(e, 2, 40);
      const auto f = gen::random_forest(e, data, 2, 4);
      const double want = oracle::realized_kappa(f, *data);
      const double got = realized_kappa(f);
      if (std::isinf(want)) {
        CHECK(std::isinf(got));
      } else {
        ++finite;
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
    }
    CHECK(finite > 0);
  }
}
