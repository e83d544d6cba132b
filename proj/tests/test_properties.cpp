#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "genforest/forest.hpp"
#include "genforest/imputer.hpp"
#include "genforest/measure.hpp"
#include "genforest/sampler.hpp"

using namespace genforest;

TEST_SUITE("properties") {
  TEST_CASE("csv round trip keeps schema and values") {
    gen::Engine e(81);
    for (int i = 0; i < 40; ++i) {
      const auto ds = gen::random_dataset(e, 1 + gen::below(e, 5), 1 + gen::below(e, 30), 0.15);
      const auto back = parse_csv(to_csv(*ds));
      CHECK(back.schema() == ds->schema());
      CHECK(back.same_values(*ds));
      CHECK(dataset_hash(back) == dataset_hash(*ds));
    }
  }

  TEST_CASE("model text round trip") {
    gen::Engine e(82);
    for (int i = 0; i < 20; ++i) {
      const auto data = gen::random_dataset(e, 3, 40, 0.05);
      const auto mode = gen::coin(e) ? ForestMode::GF : ForestMode::EOGT;
      const auto f = gen::random_forest(e, data, 1 + gen::below(e, 3), 8, mode);
      const auto text = to_text(f);
      const auto back = from_text(text, mode == ForestMode::GF ? data : nullptr);
      CHECK(to_text(back) == text);
      CHECK(back.total_splits() == f.total_splits());
      const Loss sq(LossKind::Square);
      CHECK(poprisk(back, sq, 0.5) == poprisk(f, sq, 0.5));
    }
  }

  TEST_CASE("partition masses add up") {
    gen::Engine e(83);
    for (int i = 0; i < 20; ++i) {
      const auto data = gen::random_dataset(e, 3, 40);
      const auto f = gen::random_forest(e, data, 1 + gen::below(e, 3), 9);
      double u = 0;
      double p = 0;
      std::size_t n = 0;
      for (const auto& el : enumerate_partition(f)) u += el.uniform_mass, p += el.probability, n += *el.count;
      CHECK(u == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(n == 40);
      double q = 0;
      for (const auto& el : enumerate_partition(to_eogt(f))) q += el.probability;
      CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("partition masses add up with missing values") {
    gen::Engine e(89);
    for (int i = 0; i < 20; ++i) {
      const auto data = gen::random_dataset(e, 3, 40, 0.2);
      const auto f = gen::random_forest(e, data, 1 + gen::below(e, 3), 9);
      double mass = 0;
      double p = 0;
      std::size_t n = 0;
      for (const auto& el : enumerate_partition(f)) {
        mass += el.mass, p += el.probability, n += *el.count;
        CHECK(el.mass == doctest::Approx(empirical_mass(*data, el.support)).epsilon(1e-12));
        CHECK(std::abs(el.probability - el.mass) < 1e-12);
      }
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(n >= 40);
    }
  }

  TEST_CASE("splits conserve uniform mass") {
    gen::Engine e(84);
    for (int i = 0; i < 20; ++i) {
      const auto f = gen::random_forest(e, gen::random_dataset(e, 3, 40), 2, 8);
      for (const auto& t : f.trees) {
        for (const auto& node : t.nodes()) {
          if (node.is_leaf()) continue;
          const double parts = uniform_mass(f.schema, t[static_cast<std::size_t>(node.left)].support) +
                               uniform_mass(f.schema, t[static_cast<std::size_t>(node.right)].support);
          CHECK(parts == doctest::Approx(uniform_mass(f.schema, node.support)).epsilon(1e-12));
          CHECK(node.arc_prob >= 0.0);
          CHECK(node.arc_prob <= 1.0);
        }
      }
    }
  }

  TEST_CASE("intersection is commutative and lies inside both sides") {
    gen::Engine e(85);
    for (int i = 0; i < 200; ++i) {
      const auto ds = gen::random_dataset(e, 3, 10);
      const auto a = gen::random_support(e, ds->schema());
      const auto b = gen::random_support(e, ds->schema());
      if (is_empty(a, ds->schema()) || is_empty(b, ds->schema())) continue;
      const auto ab = intersect(a, b, ds->schema());
      const auto ba = intersect(b, a, ds->schema());
      REQUIRE(ab.has_value() == ba.has_value());
      if (!ab) continue;
      CHECK(*ab == *ba);
      CHECK(is_subset(*ab, a, ds->schema()));
      CHECK(is_subset(*ab, b, ds->schema()));
      CHECK(uniform_mass(ds->schema(), *ab) <= std::min(uniform_mass(ds->schema(), a), uniform_mass(ds->schema(), b)));
    }
  }

  TEST_CASE("generated rows stay in the domain") {
    gen::Engine e(86);
    for (int i = 0; i < 10; ++i) {
      const auto data = gen::random_dataset(e, 4, 50, 0.1);
      auto f = gen::random_forest(e, data, 1 + gen::below(e, 4), 12);
      if (gen::coin(e)) f = to_eogt(f);
      GenerateOptions opt;
      opt.order = gen::coin(e) ? Order::Iterative : Order::Randomized;
      const auto out = generate(f, 300, static_cast<std::uint64_t>(i), opt);
      CHECK(out.schema() == f.schema);
      CHECK(out.missing_count() == 0);
      for (std::size_t r = 0; r < out.size(); ++r) {
        for (std::size_t c = 0; c < out.dim(); ++c) CHECK(f.schema[c].domain.contains(out.at(r, c)));
        CHECK(partition_element_of(f, out.row(r)).probability > 0);
      }
    }
  }

  TEST_CASE("expected depth lies between the shallowest and deepest tuple") {
    gen::Engine e(87);
    for (int i = 0; i < 10; ++i) {
      const auto f = gen::random_forest(e, gen::random_dataset(e, 3, 40), 2, 8);
      int lo = 1 << 30;
      int hi = 0;
      for (const auto& el : enumerate_partition(f)) {
        if (el.probability <= 0) continue;
        lo = std::min(lo, el.depth);
        hi = std::max(hi, el.depth);
      }
      const double d = expected_depth(f);
      CHECK(d >= lo - 1e-12);
      CHECK(d <= hi + 1e-12);
    }
  }

  TEST_CASE("imputation never changes observed values") {
    gen::Engine e(88);
    for (int i = 0; i < 10; ++i) {
      const auto data = gen::random_dataset(e, 3, 40);
      const auto f = gen::random_forest(e, data, 2, 8);
      const auto masked = apply_mcar(*data, 0.3, static_cast<std::uint64_t>(i));
      const auto out = impute_dataset(f, masked.data, 5);
      for (std::size_t r = 0; r < out.size(); ++r) {
        for (std::size_t c = 0; c < out.dim(); ++c) {
          if (!masked.mask.at(r, c)) CHECK(out.at(r, c) == data->at(r, c));
        }
      }
    }
  }
}
