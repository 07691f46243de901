#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "omba/stats.hpp"
#include "synthetic.hpp"

using namespace omba;
using namespace omba::stats;

namespace {

Basket make_basket(std::initializer_list<const char*> products, std::int64_t t = 0) {
  Basket b;
  b.timestamp = t;
  b.user = "u";
  for (const char* p : products) b.items.push_back(BasketItem{p, 1.0});
  return b;
}

// The 5-basket fixture: {A,B},{A,B},{A,C},{B,C},{C,D}
std::vector<Basket> fixture() {
  return {make_basket({"A", "B"}), make_basket({"A", "B"}), make_basket({"A", "C"}),
          make_basket({"B", "C"}), make_basket({"C", "D"})};
}

}  // namespace

TEST_CASE("build_index: simple counting") {
  auto index = build_index(std::vector<Basket>{make_basket({"A", "B"}), make_basket({"A"})});
  CHECK(index.basket_count() == 2);
  CHECK(index.item_count("A") == 2);
  CHECK(index.item_count("B") == 1);
  CHECK(index.pair_count("A", "B") == 1);
  CHECK(index.pair_count("B", "A") == 1);
}

TEST_CASE("build_index: empty stream") {
  auto index = build_index(std::vector<Basket>{});
  CHECK(index.basket_count() == 0);
  CHECK(index.item_count("A") == 0);
  CHECK_THROWS_AS(index.support("A"), std::runtime_error);
}

TEST_CASE("build_index: the 5-basket fixture counts") {
  auto index = build_index(fixture());
  CHECK(index.pair_count("A", "B") == 2);
  CHECK(index.pair_count("A", "C") == 1);
  CHECK(index.item_count("C") == 3);
}

TEST_CASE("support on the fixture") {
  auto index = build_index(fixture());
  CHECK(index.support("A") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(index.support("unseen") == 0.0);
  CHECK(index.support("A", "B") == doctest::Approx(0.4).epsilon(1e-12));
  const std::vector<std::string> pair{"A", "B"};
  CHECK(index.support(pair) == doctest::Approx(0.4).epsilon(1e-12));
  const std::vector<std::string> triple{"A", "B", "C"};
  CHECK_THROWS_AS(index.support(triple), std::invalid_argument);
}

TEST_CASE("lift on the fixture: 0.4 / 0.36") {
  auto index = build_index(fixture());
  CHECK(std::fabs(index.lift("A", "B") - 10.0 / 9.0) < 1e-9);
  CHECK(index.lift("A", "B") == index.lift("B", "A"));
}

TEST_CASE("lift: never co-purchased but present is 0, unseen is undefined") {
  auto index = build_index(std::vector<Basket>{make_basket({"A"}), make_basket({"B"})});
  CHECK(index.lift("A", "B") == 0.0);
  CHECK_THROWS_AS(index.lift("A", "nope"), LiftUndefined);
  CHECK(!index.try_lift("A", "nope").has_value());
  CHECK(index.try_lift("A", "B") == 0.0);
}

TEST_CASE("lift: the reported 43.45 example from back-derived supports") {
  // marginals 0.012 and 0.005 with joint support 0.0026070; a million
  // baskets make these supports exact
  CooccurrenceIndex index;
  const int total = 1000000;
  const int joint = 2607, x_total = 12000, y_total = 5000;
  const Basket both = make_basket({"x", "y"});
  const Basket only_x = make_basket({"x"});
  const Basket only_y = make_basket({"y"});
  const Basket filler = make_basket({"z"});
  for (int i = 0; i < joint; ++i) index.add_basket(both);
  for (int i = 0; i < x_total - joint; ++i) index.add_basket(only_x);
  for (int i = 0; i < y_total - joint; ++i) index.add_basket(only_y);
  for (int i = x_total + y_total - joint; i < total; ++i) index.add_basket(filler);
  REQUIRE(index.basket_count() == total);
  CHECK(index.support("x") == 0.012);
  CHECK(index.support("y") == 0.005);
  CHECK(std::fabs(index.lift("x", "y") - 43.45) < 0.01);
}

TEST_CASE("lift symmetry over random indices") {
  Rng rng(5);
  std::vector<Basket> baskets;
  for (int i = 0; i < 300; ++i) {
    Basket b = make_basket({});
    const int size = 1 + static_cast<int>(rng.next_below(4));
    for (int k = 0; k < size; ++k) {
      std::string p = "p" + std::to_string(rng.next_below(20));
      bool dup = false;
      for (auto& item : b.items) dup |= item.product == p;
      if (!dup) b.items.push_back(BasketItem{p, 1.0});
    }
    baskets.push_back(std::move(b));
  }
  auto index = build_index(baskets);
  for (int a = 0; a < 20; ++a) {
    for (int b = a + 1; b < 20; ++b) {
      const std::string pa = "p" + std::to_string(a), pb = "p" + std::to_string(b);
      auto l1 = index.try_lift(pa, pb);
      auto l2 = index.try_lift(pb, pa);
      CHECK(l1 == l2);
    }
  }
}

TEST_CASE("independent products converge to lift 1") {
  // x inserted with p=0.3, y with q=0.45, independently, 50k baskets
  Rng rng(4242);
  std::vector<Basket> baskets;
  for (int i = 0; i < 50000; ++i) {
    Basket b = make_basket({"filler"});
    if (rng.next_double() < 0.3) b.items.push_back(BasketItem{"x", 1.0});
    if (rng.next_double() < 0.45) b.items.push_back(BasketItem{"y", 1.0});
    baskets.push_back(std::move(b));
  }
  auto index = build_index(baskets);
  CHECK(std::fabs(index.lift("x", "y") - 1.0) < 0.1);
}

TEST_CASE("incremental window feed equals batch build") {
  auto stream = testing::make_stream([] {
    testing::StreamSpec spec;
    spec.products = 120;
    spec.users = 20;
    spec.baskets = 1000;
    spec.windows = 10;
    spec.planted_pairs = 5;
    spec.seed = 31;
    return spec;
  }());
  auto windows = [&] {
    std::vector<Window> out(10);
    for (std::size_t w = 0; w < out.size(); ++w) out[w].index = static_cast<std::int64_t>(w);
    for (const Basket& b : stream.baskets)
      out[static_cast<std::size_t>(b.timestamp / 86400)].baskets.push_back(b);
    return out;
  }();

  CooccurrenceIndex incremental;
  for (const Window& w : windows) incremental.add_window(w);
  auto batch = build_index(stream.baskets);

  CHECK(incremental.basket_count() == batch.basket_count());
  std::ostringstream a, b;
  incremental.dump_pairs_csv(a);
  batch.dump_pairs_csv(b);
  CHECK(a.str() == b.str());
  CHECK(incremental.item_counts() == batch.item_counts());
}

TEST_CASE("pair counts never exceed marginals or basket count") {
  auto index = build_index(fixture());
  for (const char* x : {"A", "B", "C", "D"}) {
    CHECK(index.item_count(x) <= static_cast<std::int64_t>(index.basket_count()));
    for (const char* y : {"A", "B", "C", "D"}) {
      if (std::string(x) == y) continue;
      CHECK(index.pair_count(x, y) <= std::min(index.item_count(x), index.item_count(y)));
    }
  }
}

TEST_CASE("baseline scores on the fixture") {
  auto index = build_index(fixture());
  const std::vector<std::string> context_a{"A"};
  CHECK(baseline_score("C", {}, index, BaselineMethod::Pop) == 3.0);
  CHECK(baseline_score("B", context_a, index, BaselineMethod::Sup) ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(baseline_score("unseen", context_a, index, BaselineMethod::Lift) == 0.0);
  CHECK(baseline_score("unseen", context_a, index, BaselineMethod::Pop) == 0.0);
  // undefined lift terms are treated as zero, not errors
  const std::vector<std::string> context_unseen{"ghost"};
  CHECK(baseline_score("A", context_unseen, index, BaselineMethod::Lift) == 0.0);
}

TEST_CASE("dump_pairs_csv has the documented header") {
  auto index = build_index(fixture());
  std::ostringstream out;
  index.dump_pairs_csv(out);
  CHECK(out.str().rfind("product_a,product_b,pair_count\n", 0) == 0);
  CHECK(out.str().find("A,B,2\n") != std::string::npos);
}
