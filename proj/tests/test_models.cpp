#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "survgen/models.hpp"
#include "survgen/rng.hpp"

using namespace survgen;

namespace {

// Direct transcriptions of the two survival models, written without the
// cumulative-hazard rearrangements used by the library.
double yp_direct(double t, double eta1, double eta2, const BaselineDistribution& b) {
  const double s0 = b.survival(t);
  const double r0 = (1.0 - s0) / s0;
  return std::pow(1.0 + r0 * std::exp(eta1 - eta2), -std::exp(eta2));
}

double eh_direct(double t, double eta1, double eta2, const BaselineDistribution& b) {
  return std::pow(b.survival(t / std::exp(eta1)), std::exp(eta1 + eta2));
}

// Bisection for S(t) = u on a bracket found by doubling.
template <class F>
double bisect(F survival, double u) {
  double lo = 0.0, hi = 1.0;
  while (survival(hi) > u) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (survival(mid) > u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BaselinePtr baseline(const char* name) {
  const auto& reg = default_baselines();
  const std::string n = name;
  if (n == "exp") return reg.lookup("exp", {{"rate", 0.7}});
  if (n == "weibull") return reg.lookup("weibull", {{"shape", 1.5}, {"scale", 1.0}});
  if (n == "llogis") return reg.lookup("llogis", {{"shape", 1.5}, {"scale", 1.0}});
  if (n == "lnorm") return reg.lookup("lnorm", {{"meanlog", 0.0}, {"sdlog", 0.5}});
  return reg.lookup("gompertz", {{"shape", 0.3}, {"rate", 0.5}});
}

}  // namespace

TEST_CASE("family names") {
  for (Family f : {Family::aft, Family::ah, Family::ph, Family::po, Family::eh, Family::yp})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_family("cox"), NotFoundError);
  CHECK(uses_phi(Family::yp));
  CHECK_FALSE(uses_phi(Family::po));
}

TEST_CASE("zero predictors reduce to the baseline quantile") {
  for (const char* name : {"exp", "weibull", "llogis", "lnorm", "gompertz"}) {
    const auto b = baseline(name);
    for (double u : {0.05, 0.3, 0.5, 0.9}) {
      CHECK(gen_yp(u, 0, 0, *b) == Catch::Approx(b->quantile_upper(u)).epsilon(1e-12));
      CHECK(gen_eh(u, 0, 0, *b) == Catch::Approx(b->quantile_upper(u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("proportional odds example with an exponential baseline") {
  const auto b = default_baselines().lookup("exp", {{"rate", 1.0}});
  const double t = gen_yp(0.5, std::log(2.0), 0.0, *b);
  CHECK(t == Catch::Approx(-std::log(2.0 / 3.0)).epsilon(1e-12));
  CHECK(t == Catch::Approx(0.405465108108164).epsilon(1e-12));
  CHECK(bisect([&](double s) { return yp_direct(s, std::log(2.0), 0.0, *b); }, 0.5) ==
        Catch::Approx(t).epsilon(1e-10));
}

TEST_CASE("Yang-Prentice with crossing coefficients matches a bisection oracle") {
  const auto b = baseline("weibull");
  const double t = gen_yp(0.3, 2.0, -1.5, *b);
  CHECK(std::abs(yp_direct(t, 2.0, -1.5, *b) - 0.3) < 1e-9);
  CHECK(t == Catch::Approx(bisect([&](double s) { return yp_direct(s, 2.0, -1.5, *b); }, 0.3)).epsilon(1e-9));
}

TEST_CASE("extended hazard special cases") {
  const double rate = 1.3;
  const auto e = default_baselines().lookup("exp", {{"rate", rate}});
  for (double eta : {-3.0, -0.5, 0.0, 1.0, 4.0})
    for (double u : {0.1, 0.5, 0.8})
      CHECK(gen_eh(u, eta, 0.0, *e) == Catch::Approx(-std::log(u) / rate).epsilon(1e-12));

  const auto w = baseline("weibull");
  for (double eta : {-2.0, 0.7, 3.0})
    CHECK(gen_eh(0.4, eta, -eta, *w) == Catch::Approx(std::exp(eta) * w->quantile_upper(0.4)).epsilon(1e-12));
}

TEST_CASE("library survival functions agree with the direct forms") {
  Rng rng(5, 0);
  for (const char* name : {"exp", "weibull", "llogis", "lnorm", "gompertz"}) {
    const auto b = baseline(name);
    for (int i = 0; i < 200; ++i) {
      const double t = 0.05 + 3.0 * rng.uniform();
      const double e1 = rng.normal(0.0, 1.0), e2 = rng.normal(0.0, 1.0);
      INFO(name << " t=" << t << " eta=" << e1 << "," << e2);
      CHECK(yp_survival(t, e1, e2, *b) == Catch::Approx(yp_direct(t, e1, e2, *b)).epsilon(1e-9).margin(1e-300));
      CHECK(eh_survival(t, e1, e2, *b) == Catch::Approx(eh_direct(t, e1, e2, *b)).epsilon(1e-9).margin(1e-300));
    }
  }
}

TEST_CASE("uniformity round trip for every family and baseline") {
  Rng rng(2718, 0);
  for (Family f : {Family::aft, Family::ah, Family::ph, Family::po, Family::eh, Family::yp}) {
    for (const char* name : {"exp", "weibull", "llogis", "lnorm", "gompertz"}) {
      const auto b = baseline(name);
      for (int i = 0; i < 200; ++i) {
        const double u = rng.uniform();
        const Predictors p = family_predictors(f, rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
        const double t = generate_one(f, u, p, *b);
        INFO(to_string(f) << " " << name << " u=" << u << " t=" << t);
        REQUIRE(t > 0.0);
        CHECK(std::abs(family_survival(f, t, p, *b) - u) < 1e-8);
      }
    }
  }
}

TEST_CASE("PH through both parent models") {
  Rng rng(31, 0);
  for (const char* name : {"exp", "weibull", "llogis", "lnorm", "gompertz"}) {
    const auto b = baseline(name);
    for (int i = 0; i < 200; ++i) {
      const double u = rng.uniform();
      const double eta = rng.normal(0.0, 1.5);
      const double a = gen_yp(u, eta, eta, *b);
      const double c = gen_eh(u, 0.0, eta, *b);
      CHECK(std::abs(a - c) <= 1e-10 * std::abs(c));
    }
  }
}

TEST_CASE("generated time decreases strictly in u") {
  for (Family f : {Family::aft, Family::ah, Family::ph, Family::po, Family::eh, Family::yp}) {
    const auto b = baseline("llogis");
    const Predictors p = family_predictors(f, 0.8, -0.4);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 100; ++k) {
      const double t = generate_one(f, k / 100.0, p, *b);
      CHECK(t < previous);
      previous = t;
    }
  }
}

TEST_CASE("extreme predictors are clamped instead of overflowing") {
  const auto b = baseline("weibull");
  for (double eta : {-1e4, 1e4}) {
    const double a = gen_yp(0.5, eta, -eta, *b);
    const double c = gen_eh(0.5, eta, 0.5 * eta, *b);
    CHECK_FALSE(std::isnan(a));
    CHECK_FALSE(std::isnan(c));
  }
  CHECK_THROWS_AS(gen_yp(0.0, 0, 0, *b), DomainError);
  CHECK_THROWS_AS(gen_eh(1.0, 0, 0, *b), DomainError);
}

TEST_CASE("formula-level generation") {
  Table t;
  t.add_numeric("age", {0.0, 1.0, -0.5, 2.0});
  t.add_categorical("sex", {"f", "m", "f", "m"});
  const auto ll = default_baselines().lookup("llogis", {{"shape", 1.5}, {"scale", 1.0}});
  const std::vector<double> beta{1.0, 2.0, -0.5};
  const std::vector<double> u(4, 0.5);

  const auto times = generate(Family::aft, u, "~ age*sex", t, beta, std::nullopt, *ll);
  CHECK(times[0] == Catch::Approx(1.0).epsilon(1e-14));

  // log t(x) - log t(0) = x beta for a shared u.
  const DesignMatrix dm = build_design("~ age*sex", t);
  const auto eta = dm.linear_predictor(beta);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::log(times[i]) - std::log(times[0]) == Catch::Approx(eta[i]).margin(1e-12));

  const auto e = default_baselines().lookup("exp", {{"rate", 1.0}});
  Table z;
  z.add_numeric("a", {0.0});
  z.add_numeric("b", {0.0});
  CHECK(generate(Family::ph, std::vector<double>{std::exp(-1.0)}, "~ a + b", z, {1.0, 0.5}, std::nullopt, *e)[0] ==
        Catch::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(generate(Family::aft, u, "~ age*sex", t, {1.0, 2.0}, std::nullopt, *ll), DomainError);
  CHECK_THROWS_AS(generate(Family::aft, u, "~ age", t, {1.0}, std::vector<double>{1.0}, *ll), DomainError);
  CHECK_THROWS_AS(generate(Family::yp, u, "~ age", t, {1.0}, std::nullopt, *ll), DomainError);
  CHECK_THROWS_AS(generate(Family::ph, std::vector<double>(3, 0.5), "~ age", t, {1.0}, std::nullopt, *ll),
                  DomainError);
}

TEST_CASE("offsets enter both predictors") {
  Table t;
  t.add_numeric("x", {0.0, 0.0});
  t.add_numeric("w", {0.0, 0.9});
  const DesignMatrix dm = build_design("~ x + offset(w)", t);
  const LinearPredictors lp = linear_predictors(Family::yp, dm, {1.0}, std::vector<double>{2.0});
  CHECK(lp.eta1[1] == Catch::Approx(0.9));
  CHECK(lp.eta2[1] == Catch::Approx(0.9));
  CHECK(lp.eta1[0] == 0.0);
  CHECK(lp.eta2[0] == 0.0);
}

TEST_CASE("YP crossing: analytic group survival difference changes sign") {
  const auto b = baseline("weibull");
  bool positive = false, negative = false;
  for (int k = 1; k < 500; ++k) {
    const double t = 5.0 * k / 500.0;
    const double d = yp_survival(t, 2.0, -1.5, *b) - yp_survival(t, 0.0, 0.0, *b);
    positive = positive || d > 0;
    negative = negative || d < 0;
  }
  CHECK(positive);
  CHECK(negative);
}
