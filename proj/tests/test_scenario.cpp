#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "survgen/check.hpp"
#include "survgen/csv.hpp"
#include "survgen/scenario.hpp"
#include "survgen/special.hpp"

using namespace survgen;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = SURVGEN_SCENARIO_DIR;

ScenarioSpec shipped(const std::string& stem) { return load_scenario(kScenarios / (stem + ".json")); }

json aft_doc() {
  return json::parse(R"({
    "seed": 42, "n": 200,
    "covariates": [
      {"name": "age", "dist": "normal", "mean": 0, "sd": 1},
      {"name": "sex", "dist": "categorical", "levels": ["f", "m"]}
    ],
    "outcomes": [
      {"name": "t", "model": "aft", "formula": "~ age*sex", "beta": [1, 2, -0.5],
       "dist": "llogis", "params": {"shape": 1.5, "scale": 1}}
    ],
    "censoring": [{"type": "admin", "event": "t", "tau": 10}]
  })");
}

std::string validation_path(const json& doc) {
  try {
    validate_scenario(parse_scenario(doc));
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<valid>";
}

}  // namespace

TEST_CASE("every shipped scenario validates and runs") {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().filename().string());
    const ScenarioSpec spec = load_scenario(entry.path());
    CHECK_NOTHROW(validate_scenario(spec));
    const ScenarioResult r = run_scenario(spec);
    CHECK(r.table.n_rows() == spec.n);
    CHECK(check_scenario(spec, 2).ok());
  }
}

TEST_CASE("AFT scenario: columns and censoring probability") {
  const ScenarioSpec spec = shipped("aft_type1_right");
  const ScenarioResult r = run_scenario(spec);
  const Table out = r.selected();
  CHECK(out.names() == std::vector<std::string>{"age", "sex", "time", "status"});
  CHECK(out.n_rows() == 1000);

  // E_x[S(10 | x)] with age ~ N(0, 1), sex uniform on {f, m}:
  // S(10 | x) = 1 / (1 + (10 e^{-eta})^{1.5}), eta = age + 2 m - 0.5 age m.
  double expected = 0.0;
  const int steps = 4000;
  for (int k = 0; k < steps; ++k) {
    const double z = -8.0 + 16.0 * (k + 0.5) / steps;
    const double w = special::normal_pdf(z) * 16.0 / steps;
    for (int m = 0; m <= 1; ++m) {
      const double eta = z + 2.0 * m - 0.5 * z * m;
      expected += 0.5 * w / (1.0 + std::pow(10.0 * std::exp(-eta), 1.5));
    }
  }
  double censored = 0.0;
  for (double s : out.numeric("status")) censored += s == 0.0;
  CHECK(std::abs(censored / 1000.0 - expected) < 0.04);
}

TEST_CASE("n = 0 gives an empty table with the declared columns") {
  json doc = aft_doc();
  doc["n"] = 0;
  const ScenarioResult r = run_scenario(parse_scenario(doc));
  CHECK(r.table.n_rows() == 0);
  CHECK(r.selected().names() == std::vector<std::string>{"age", "sex", "time", "status"});
}

TEST_CASE("competing risks: one cause when an event precedes censoring") {
  const ScenarioResult r = run_scenario(shipped("competing_risks"));
  const Table& t = r.table;
  const auto& y = t.numeric("y");
  const auto& a = t.numeric("a");
  for (std::size_t i = 0; i < t.n_rows(); ++i) {
    const double total = t.numeric("status1")[i] + t.numeric("status2")[i] + t.numeric("status3")[i];
    INFO("row " << i);
    REQUIRE(total == (y[i] < a[i] ? 1.0 : 0.0));
    REQUIRE(y[i] == std::min({t.numeric("t1")[i], t.numeric("t2")[i], t.numeric("t3")[i], a[i]}));
  }
}

TEST_CASE("same seed gives identical CSV, new seed changes it") {
  const ScenarioSpec spec = shipped("shared_frailty");
  const std::string a = to_csv(run_scenario(spec).selected(true));
  const std::string b = to_csv(run_scenario(spec).selected(true));
  const std::string c = to_csv(run_scenario(spec, RunOptions{spec.seed + 1, std::nullopt}).selected(true));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("output selection does not change retained values") {
  json doc = aft_doc();
  const Table full = run_scenario(parse_scenario(doc)).selected(true);
  doc["output"] = json::array({"status", "age"});
  const Table some = run_scenario(parse_scenario(doc)).selected();
  CHECK(some.names() == std::vector<std::string>{"status", "age"});
  CHECK(bitwise_equal(some.numeric("age"), full.numeric("age")));
  CHECK(bitwise_equal(some.numeric("status"), full.numeric("status")));
}

TEST_CASE("rows do not depend on the table size") {
  const ScenarioSpec spec = parse_scenario(aft_doc());
  const Table small = run_scenario(spec, RunOptions{std::nullopt, 50}).table;
  const Table large = run_scenario(spec, RunOptions{std::nullopt, 500}).table;
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(small.numeric("t")[i] == large.numeric("t")[i]);
    REQUIRE(small.categorical("sex")[i] == large.categorical("sex")[i]);
  }
}

TEST_CASE("latent columns") {
  const ScenarioResult r = run_scenario(parse_scenario(aft_doc()));
  CHECK(r.selected().names() == std::vector<std::string>{"age", "sex", "time", "status"});
  CHECK(r.selected(true).names() == std::vector<std::string>{"age", "sex", "time", "status", "t"});
}

TEST_CASE("validation errors carry a path") {
  json doc = aft_doc();
  doc["outcomes"][0]["beta"] = json::array({1, 2});
  CHECK(validation_path(doc) == "/outcomes/0");

  doc = aft_doc();
  doc["outcomes"][0]["bta"] = 1;
  CHECK(validation_path(doc) == "/outcomes/0/bta");

  doc = aft_doc();
  doc["outcomes"][0]["dist"] = "nosuch";
  CHECK(validation_path(doc) == "/outcomes/0/dist");

  doc = aft_doc();
  doc["outcomes"][0]["params"]["shape"] = -1;
  CHECK(validation_path(doc) == "/outcomes/0/dist");

  doc = aft_doc();
  doc["outcomes"][0]["formula"] = "~ age + 1";
  CHECK(validation_path(doc) == "/outcomes/0/formula");

  doc = aft_doc();
  doc["outcomes"][0]["formula"] = "~ weight";
  CHECK(validation_path(doc) == "/outcomes/0");

  doc = aft_doc();
  doc["censoring"][0]["event"] = "nosuch";
  CHECK(validation_path(doc) == "/censoring/0");

  doc = aft_doc();
  doc["seed"] = -1;
  CHECK(validation_path(doc) == "/seed");

  doc = aft_doc();
  doc.erase("n");
  CHECK(validation_path(doc) == "/n");

  doc = aft_doc();
  doc["copula"] = json::parse(R"({"family": "clayton", "tau": 0.5, "dim": 2})");
  CHECK(validation_path(doc) == "/copula/dim");

  doc = aft_doc();
  doc["output"] = json::array({"age", "nosuch"});
  CHECK(validation_path(doc) == "/output");

  doc = aft_doc();
  doc["outcomes"][0]["model"] = "yp";
  CHECK(validation_path(doc) == "/outcomes/0/phi");

  doc = aft_doc();
  doc["covariates"][1]["probs"] = json::array({0.5, 0.6});
  CHECK(validation_path(doc) == "/covariates/1/probs");

  CHECK(validation_path(aft_doc()) == "<valid>");
}

TEST_CASE("cured rows carry infinite times until censored") {
  json doc = json::parse(R"({
    "seed": 1, "n": 500,
    "covariates": [{"name": "x", "dist": "normal"}],
    "cure": {"formula": "~ x", "incidence": "poisson", "kappa": [0, 0]},
    "outcomes": [{"name": "t", "model": "ph", "dist": "exp", "params": {"rate": 1}, "u": "cure"}],
    "censoring": [{"type": "admin", "event": "t", "tau": 5}]
  })");
  const ScenarioResult ok = run_scenario(parse_scenario(doc));
  const auto& cured = ok.table.numeric("cured");
  const auto& t = ok.table.numeric("t");
  for (std::size_t i = 0; i < cured.size(); ++i) CHECK((cured[i] == 1.0) == std::isinf(t[i]));

  doc["censoring"] = json::array();
  doc["output"] = json::array({"t"});
  const ScenarioResult raw = run_scenario(parse_scenario(doc));
  CHECK(std::isinf(*std::max_element(raw.table.numeric("t").begin(), raw.table.numeric("t").end())));
}

TEST_CASE("covariates from a CSV file") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "survgen_test_scenario";
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "cov.csv");
    csv << "age,sex\n0.5,\"f\"\n-1.0,\"m\"\n2.0,\"m\"\n";
  }
  json doc = json::parse(R"({
    "seed": 3, "data": "cov.csv",
    "outcomes": [{"name": "t", "model": "ph", "formula": "~ age + sex", "beta": [0.5, 1],
                  "dist": "weibull", "params": {"shape": 2, "scale": 1}}],
    "censoring": [{"type": "admin", "event": "t", "tau": 3}]
  })");
  const ScenarioResult r = run_scenario(parse_scenario(doc, dir));
  CHECK(r.table.n_rows() == 3);
  CHECK(r.selected().names() == std::vector<std::string>{"age", "sex", "time", "status"});

  {
    std::ofstream csv(dir / "holes.csv");
    csv << "age,sex\n0.5,\"f\"\n,\"m\"\n";
  }
  doc["data"] = "holes.csv";
  try {
    validate_scenario(parse_scenario(doc, dir));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.path() == "/outcomes/0");
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  doc["data"] = "absent.csv";
  CHECK_THROWS_AS(validate_scenario(parse_scenario(doc, dir)), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_scenario errors") {
  CHECK_THROWS_AS(load_scenario("/no/such/scenario.json"), ValidationError);
  const std::filesystem::path bad = std::filesystem::temp_directory_path() / "survgen_bad.json";
  {
    std::ofstream out(bad);
    out << "{\"seed\": 1,";
  }
  CHECK_THROWS_AS(load_scenario(bad), ValidationError);
  std::filesystem::remove(bad);
}

TEST_CASE("row streams are disjoint across stages, blocks and rows") {
  CHECK(row_stream(1, Stage::outcomes, 0, 0).next_u64() != row_stream(1, Stage::censoring, 0, 0).next_u64());
  CHECK(row_stream(1, Stage::outcomes, 0, 0).next_u64() != row_stream(1, Stage::outcomes, 1, 0).next_u64());
  CHECK(row_stream(1, Stage::outcomes, 0, 0).next_u64() != row_stream(1, Stage::outcomes, 0, 1).next_u64());
  CHECK(row_stream(1, Stage::outcomes, 2, 3).next_u64() == Rng(1, (5ull << 56) | (2ull << 40) | 3).next_u64());
  CHECK_THROWS_AS(row_stream(1, Stage::outcomes, 1u << 16, 0), DomainError);
}
