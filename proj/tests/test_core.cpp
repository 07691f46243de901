#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "omba/core.hpp"

using namespace omba;

TEST_CASE("normalize: 3-4-5 triangle") {
  std::vector<double> v{3.0, 4.0, 0.0, 0.0};
  auto r = normalize(v);
  CHECK(!r.degenerate);
  CHECK(r.value[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.value[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.value[2] == 0.0);
}

TEST_CASE("normalize: unit vector is unchanged") {
  std::vector<double> e1{1.0, 0.0, 0.0};
  auto r = normalize(e1);
  CHECK(!r.degenerate);
  CHECK(r.value == e1);
}

TEST_CASE("normalize: (1,1) maps to 1/sqrt(2)") {
  std::vector<double> v{1.0, 1.0};
  auto r = normalize(v);
  CHECK(std::fabs(r.value[0] - 0.70710678118654752) < 1e-9);
  CHECK(std::fabs(r.value[1] - 0.70710678118654752) < 1e-9);
}

TEST_CASE("normalize: degenerate input returned unchanged and flagged") {
  std::vector<double> z{0.0, 0.0, 0.0};
  auto r = normalize(z);
  CHECK(r.degenerate);
  CHECK(r.value == z);
  std::vector<double> tiny{1e-13, 0.0};
  CHECK(normalize(tiny).degenerate);
}

TEST_CASE("normalize: idempotent and unit-norm for random vectors") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(8);
    for (double& x : v) x = rng.next_gaussian() * 10.0;
    auto once = normalize(v);
    if (once.degenerate) continue;
    double norm = 0.0;
    for (double x : once.value) norm += x * x;
    CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-9);
    auto twice = normalize(once.value);
    for (std::size_t i = 0; i < v.size(); ++i)
      CHECK(std::fabs(twice.value[i] - once.value[i]) < 1e-12);
  }
}

TEST_CASE("rng: deterministic and roughly uniform") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng r(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += r.next_double();
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("rng: next_below stays in range and covers values") {
  Rng r(9);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = r.next_below(7);
    REQUIRE(v < 7);
    ++seen[static_cast<std::size_t>(v)];
  }
  for (int count : seen) CHECK(count > 800);
}

TEST_CASE("rng: gaussian moments") {
  Rng r(11);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.next_gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(std::fabs(sq / n - 1.0) < 0.02);
}

TEST_CASE("sub_seed: role streams differ, same role agrees") {
  CHECK(sub_seed(1, "init") != sub_seed(1, "negatives"));
  CHECK(sub_seed(1, "init") != sub_seed(2, "init"));
  CHECK(sub_seed(1, "init") == sub_seed(1, "init"));
}

TEST_CASE("sigmoid and softplus") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigmoid(-30.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sigmoid(-1000.0) == 0.0);  // no overflow
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(-40.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("embedding store: product and user may share an id string") {
  EmbeddingStore store(4);
  const auto p = store.intern(UnitKind::Product, "42");
  const auto u = store.intern(UnitKind::User, "42");
  CHECK(p != u);
  CHECK(store.unit(p).kind == UnitKind::Product);
  CHECK(store.unit(u).kind == UnitKind::User);
  CHECK(store.intern(UnitKind::Product, "42") == p);
  CHECK(store.unit_count() == 2);
}

TEST_CASE("embedding store: ensure_unit initializes once, inside the init range") {
  EmbeddingStore store(16);
  Rng init(1);
  const auto a = store.ensure_unit(UnitKind::Product, "a", init);
  CHECK(store.is_initialized(a));
  double norm = 0.0;
  for (double x : store.vec(a)) {
    CHECK(std::fabs(x) <= 0.5 / 16 + 1e-15);
    norm += std::fabs(x);
  }
  CHECK(norm > 0.0);

  const std::vector<double> before(store.vec(a).begin(), store.vec(a).end());
  store.ensure_unit(UnitKind::Product, "a", init);
  const std::vector<double> after(store.vec(a).begin(), store.vec(a).end());
  CHECK(before == after);

  // interned-but-uninitialized units stay zero until training first sees them
  const auto b = store.intern(UnitKind::Product, "b");
  CHECK(!store.is_initialized(b));
  for (double x : store.vec(b)) CHECK(x == 0.0);
  store.ensure_unit(UnitKind::Product, "b", init);
  CHECK(store.is_initialized(b));
}

TEST_CASE("embedding store: accumulators start at zero with matching dimension") {
  EmbeddingStore store(8);
  Rng init(3);
  const auto a = store.ensure_unit(UnitKind::User, "u", init);
  CHECK(store.vec(a).size() == 8);
  CHECK(store.accum(a).size() == 8);
  for (double x : store.accum(a)) CHECK(x == 0.0);
}
