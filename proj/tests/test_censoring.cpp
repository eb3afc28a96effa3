#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "survgen/censoring.hpp"
#include "survgen/rng.hpp"

using namespace survgen;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("right censoring examples") {
  auto r = right_censor(15.2363453, 10.0);
  CHECK(r.time == 10.0);
  CHECK(r.status == 0);
  r = right_censor(1.526, 10.0);
  CHECK(r.time == 1.526);
  CHECK(r.status == 1);
  r = right_censor(kInf, 2.3);
  CHECK(r.time == 2.3);
  CHECK(r.status == 0);
  r = right_censor(4.0, 4.0);  // tie goes to censored
  CHECK(r.time == 4.0);
  CHECK(r.status == 0);
  const double several[] = {7.0, 3.0, kInf};
  r = right_censor(5.0, several);
  CHECK(r.time == 3.0);
  CHECK(r.status == 0);
  CHECK_THROWS_AS(right_censor(kInf, kInf), DomainError);
  CHECK_THROWS_AS(right_censor(kInf, std::span<const double>{}), DomainError);
  CHECK_THROWS_AS(right_censor(-1.0, 2.0), DomainError);
  CHECK_THROWS_AS(right_censor(1.0, 0.0), DomainError);
}

TEST_CASE("right censoring never exceeds t and status marks exact times") {
  Rng rng(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const double t = rng.exponential(1.0);
    const double c = rng.exponential(0.7);
    const ObservedRecord r = right_censor(t, c);
    REQUIRE(r.time <= t);
    REQUIRE(r.time <= c);
    if (r.status == 1) REQUIRE(r.time == t);
  }
}

TEST_CASE("competing risks pick the strict minimum") {
  const double events[] = {3.0, 1.5, 2.0};
  const double censor[] = {4.0};
  auto r = competing_censor(events, censor);
  CHECK(r.time == 1.5);
  CHECK(r.cause == 2);
  const double early[] = {1.0};
  r = competing_censor(events, early);
  CHECK(r.time == 1.0);
  CHECK(r.cause == 0);
  r = competing_censor(events, {});
  CHECK(r.cause == 2);
  CHECK_THROWS_AS(competing_censor({}, censor), DomainError);
}

TEST_CASE("type I interval censoring examples") {
  auto r = rinterval_type1(0.0539, 0.8276881);
  CHECK(r.left == 0.0);
  CHECK(r.right == 0.8276881);
  r = rinterval_type1(5.0, 1.0);
  CHECK(r.left == 1.0);
  CHECK(std::isinf(r.right));
  r = rinterval_type1(2.0, 2.0);
  CHECK(r.left == 0.0);
  CHECK(r.right == 2.0);
  CHECK_THROWS_AS(rinterval_type1(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(rinterval_type1(1.0, -1.0), DomainError);
}

TEST_CASE("type II interval censoring examples") {
  const auto grid = visit_grid(0.0, 5.0, 1.0);
  CHECK(grid == std::vector<double>{0, 1, 2, 3, 4, 5});
  Rng rng(1, 0);
  auto r = rinterval_type2(2.5, grid, 1.0, rng);
  CHECK(r.left == 2.0);
  CHECK(r.right == 3.0);
  r = rinterval_type2(7.0, grid, 0.5, rng);
  CHECK(std::isinf(r.right));
  for (int i = 0; i < 1000; ++i) {
    r = rinterval_type2(2.583, grid, 0.7, rng);
    REQUIRE((r.left == 0.0 || r.left == 1.0 || r.left == 2.0));
    REQUIRE((r.right == 3.0 || r.right == 4.0 || r.right == 5.0 || std::isinf(r.right)));
  }
  r = rinterval_type2(3.0, grid, 1.0, rng);  // t on a visit: (2, 3]
  CHECK(r.left == 2.0);
  CHECK(r.right == 3.0);
}

TEST_CASE("type II consumes one uniform per scheduled visit after the origin") {
  const auto grid = visit_grid(0.0, 5.0, 1.0);
  Rng a(4, 4), b(4, 4);
  rinterval_type2(0.5, grid, 0.3, a);
  for (std::size_t k = 1; k < grid.size(); ++k) b.uniform();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("grid validation") {
  const std::vector<double> descending{0.0, 2.0, 1.0};
  const std::vector<double> negative{-1.0, 2.0};
  const std::vector<double> empty;
  Rng rng(1, 0);
  CHECK_THROWS_AS(validate_visit_grid(descending), DomainError);
  CHECK_THROWS_AS(validate_visit_grid(negative), DomainError);
  CHECK_THROWS_AS(validate_visit_grid(empty), DomainError);
  CHECK_THROWS_AS(rinterval_type2(1.0, visit_grid(0, 5, 1), 0.0, rng), DomainError);
  CHECK_THROWS_AS(rinterval_type2(1.0, visit_grid(0, 5, 1), 1.5, rng), DomainError);
  CHECK_THROWS_AS(visit_grid(0, 5, 0), DomainError);
  CHECK(visit_grid(0.0, 1.0, 0.1).size() == 11);
}

TEST_CASE("containment L < t <= R over random cases") {
  Rng rng(555, 0);
  for (int i = 0; i < 200000; ++i) {
    const double t = rng.exponential(0.3);
    const IntervalRecord a = rinterval_type1(t, 0.1 + 10.0 * rng.uniform());
    REQUIRE(a.left < t);
    REQUIRE(t <= a.right);

    const double start = rng.uniform();
    const double by = 0.2 + 2.0 * rng.uniform();
    const auto grid = visit_grid(start, start + by * (1 + static_cast<int>(rng.uniform() * 10)), by);
    const IntervalRecord b = rinterval_type2(t, grid, 0.05 + 0.95 * rng.uniform(), rng);
    REQUIRE(b.left < t);
    REQUIRE(t <= b.right);
    REQUIRE(b.left >= 0.0);
  }
}

TEST_CASE("prob = 1 brackets interior times by the grid step") {
  const auto grid = visit_grid(0.0, 10.0, 0.5);
  Rng rng(3, 3);
  for (int i = 0; i < 10000; ++i) {
    const double t = 0.01 + 9.98 * rng.uniform();
    const IntervalRecord r = rinterval_type2(t, grid, 1.0, rng);
    REQUIRE(r.right - r.left == Catch::Approx(0.5));
    REQUIRE(r.left == Catch::Approx(0.5 * std::ceil(t / 0.5) - 0.5));
  }
}

TEST_CASE("expected interval width shrinks as attendance grows") {
  const auto grid = visit_grid(0.0, 20.0, 1.0);
  double previous = kInf;
  for (double prob : {0.3, 0.7, 1.0}) {
    Rng rng(77, 0);
    double width = 0.0;
    int counted = 0;
    for (int i = 0; i < 50000; ++i) {
      const double t = 0.1 + 9.0 * rng.uniform();
      const IntervalRecord r = rinterval_type2(t, grid, prob, rng);
      if (std::isinf(r.right)) continue;
      width += r.right - r.left;
      ++counted;
    }
    width /= counted;
    INFO("prob=" << prob);
    CHECK(width < previous);
    previous = width;
  }
}
