#pragma once

// Declarative scenarios: a JSON document describing covariates, dependence,
// outcome models and censoring, executed in a fixed stage order
//
//   covariates -> frailty -> copula -> cure -> outcomes -> censoring -> output
//
// Randomness is drawn from per-row sub-streams of the scenario seed with
// stream id (stage << 56) | (block << 40) | row, so a value depends only on
// (seed, stage, block, row) and never on n, on other blocks or on the output
// selection. Stage numbers: covariates 1, frailty 2 (row = cluster ordinal),
// copula 3, cure 4, outcomes 5, censoring 6.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "survgen/baselines.hpp"
#include "survgen/censoring.hpp"
#include "survgen/csv.hpp"
#include "survgen/cure.hpp"
#include "survgen/dependence.hpp"
#include "survgen/error.hpp"
#include "survgen/formula.hpp"
#include "survgen/models.hpp"
#include "survgen/rng.hpp"
#include "survgen/table.hpp"

namespace survgen {

enum class Stage : std::uint64_t { covariates = 1, frailty = 2, copula = 3, cure = 4, outcomes = 5, censoring = 6 };

/// Sub-stream of `seed` for one row of one block of one stage.
inline Rng row_stream(std::uint64_t seed, Stage stage, std::uint64_t block, std::uint64_t row) {
  if (block >= (1ull << 16) || row >= (1ull << 40)) throw DomainError("row_stream: block or row index out of range");
  return Rng(seed, (static_cast<std::uint64_t>(stage) << 56) | (block << 40) | row);
}

struct CovariateSpec {
  enum class Kind { normal, uniform, categorical };
  std::string name;
  Kind kind = Kind::normal;
  double a = 0.0;  // mean | min
  double b = 1.0;  // sd | max
  std::vector<std::string> levels;
  std::vector<double> probs;
  bool latent = false;
};

struct FrailtyBlock {
  std::string name = "frailty";
  /// Existing cluster column, or the name of the generated id column.
  std::string cluster;
  bool generate_ids = false;
  std::size_t clusters = 0;
  std::size_t cluster_size = 0;
  FrailtySpec spec;
  bool latent = true;
};

struct CopulaBlock {
  std::string name = "u";
  CopulaSpec spec;
  bool latent = true;

  std::string column(std::size_t j) const { return name + std::to_string(j + 1); }
};

struct CureBlock {
  std::string formula;
  IncidenceSpec incidence;
  std::string name = "cured";
  bool latent = true;
};

struct OutcomeBlock {
  std::string name;
  Family family = Family::ph;
  /// Empty: no covariates (eta = 0).
  std::string formula;
  std::vector<double> beta;
  std::optional<std::vector<double>> phi;
  BaselineSpec baseline;
  /// "fresh", "cure", or a copula column name.
  std::string u = "fresh";
  bool latent = true;
};

struct CensorStep {
  enum class Kind { admin, random, right, interval_type1, interval_type2 };
  Kind kind = Kind::admin;
  // admin / right
  std::vector<std::string> events;
  std::vector<std::string> censors;
  std::optional<double> tau;
  std::string time = "time";
  std::vector<std::string> status;
  // random
  std::string name;
  BaselineSpec dist;
  bool latent = true;
  // interval
  std::string tau_column;
  std::vector<double> grid;
  double prob = 1.0;
  std::string left = "left";
  std::string right = "right";
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::optional<std::string> data;  // CSV path, resolved against base_dir
  std::filesystem::path base_dir;
  std::vector<CovariateSpec> covariates;
  std::optional<FrailtyBlock> frailty;
  std::optional<CopulaBlock> copula;
  std::optional<CureBlock> cure;
  std::vector<OutcomeBlock> outcomes;
  std::vector<CensorStep> censoring;
  std::optional<std::vector<std::string>> output;
};

// ---------------------------------------------------------------- parsing

namespace detail {

using nlohmann::json;

class SpecReader {
 public:
  SpecReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(std::string_view key) const { return path_ + "/" + std::string(key); }
  bool has(std::string_view key) const { return node_.contains(std::string(key)); }

  const json& raw(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = node_.find(std::string(key));
    if (it == node_.end()) throw ValidationError(child(key), "required field is missing");
    return *it;
  }

  std::string string(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(std::string_view key, std::string fallback) {
    return has(key) ? string(key) : std::move(fallback);
  }

  double number(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(child(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(child(key), "expected a finite number");
    return x;
  }
  double number(std::string_view key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ValidationError(child(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  bool boolean(std::string_view key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(std::string_view key) {
    const json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ValidationError(child(key), "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ValidationError(child(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(std::string_view key) {
    const json& v = raw(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) throw ValidationError(child(key), "expected a string or an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ValidationError(child(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  Params params(std::string_view key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_object()) throw ValidationError(child(key), "expected an object of named numbers");
    Params out;
    for (const auto& [k, x] : v.items()) {
      if (!x.is_number()) throw ValidationError(child(key) + "/" + k, "expected a number");
      out.emplace(k, x.get<double>());
    }
    return out;
  }

  /// Rejects keys that were never read (typos in the document).
  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) throw ValidationError(child(key), "unknown field");
  }

  void mark(std::string_view key) { seen_.insert(std::string(key)); }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
auto rethrow_at(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path, e.what());
  }
}

inline std::uint64_t parse_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::uint64_t out = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty()) return out;
  }
  throw ValidationError(path, "seed must be a non-negative 64-bit integer");
}

inline CovariateSpec parse_covariate(const json& node, const std::string& path) {
  SpecReader in(node, path);
  CovariateSpec c;
  c.name = in.string("name");
  const std::string dist = in.string("dist");
  if (dist == "normal") {
    c.kind = CovariateSpec::Kind::normal;
    c.a = in.number("mean", 0.0);
    c.b = in.number("sd", 1.0);
    if (!(c.b >= 0.0)) throw ValidationError(in.child("sd"), "sd must be non-negative");
  } else if (dist == "uniform") {
    c.kind = CovariateSpec::Kind::uniform;
    c.a = in.number("min", 0.0);
    c.b = in.number("max", 1.0);
    if (!(c.b > c.a)) throw ValidationError(in.child("max"), "max must exceed min");
  } else if (dist == "categorical") {
    c.kind = CovariateSpec::Kind::categorical;
    c.levels = in.strings("levels");
    if (c.levels.empty()) throw ValidationError(in.child("levels"), "at least one level is required");
    std::set<std::string> unique(c.levels.begin(), c.levels.end());
    if (unique.size() != c.levels.size()) throw ValidationError(in.child("levels"), "levels must be distinct");
    if (in.has("probs")) {
      c.probs = in.numbers("probs");
      if (c.probs.size() != c.levels.size())
        throw ValidationError(in.child("probs"), "probs must have one entry per level");
      double total = 0.0;
      for (double p : c.probs) {
        if (!(p >= 0.0)) throw ValidationError(in.child("probs"), "probabilities must be non-negative");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ValidationError(in.child("probs"), "probabilities must sum to 1");
    } else {
      c.probs.assign(c.levels.size(), 1.0 / static_cast<double>(c.levels.size()));
    }
  } else {
    throw ValidationError(in.child("dist"), "unknown covariate distribution '" + dist +
                                                "' (known: normal, uniform, categorical)");
  }
  c.latent = in.boolean("latent", false);
  in.finish();
  return c;
}

inline FrailtyBlock parse_frailty(const json& node, const std::string& path, std::size_t n) {
  SpecReader in(node, path);
  FrailtyBlock f;
  f.name = in.string("name", "frailty");
  f.cluster = in.string("cluster", "id");
  if (in.has("clusters") && in.has("cluster_size"))
    throw ValidationError(path, "give either clusters or cluster_size, not both");
  if (in.has("clusters")) {
    f.generate_ids = true;
    f.clusters = in.count("clusters");
    if (f.clusters == 0) throw ValidationError(in.child("clusters"), "must be positive");
    if (n % f.clusters != 0)
      throw ValidationError(in.child("clusters"), "n = " + std::to_string(n) + " is not a multiple of " +
                                                      std::to_string(f.clusters) + " clusters");
  } else if (in.has("cluster_size")) {
    f.generate_ids = true;
    f.cluster_size = in.count("cluster_size");
    if (f.cluster_size == 0) throw ValidationError(in.child("cluster_size"), "must be positive");
  }
  const std::string family = in.string("frailty", "gamma");
  rethrow_at(in.child("frailty"), [&] {
    f.spec.family = parse_frailty_family(family);
    return 0;
  });
  if (f.spec.family == FrailtyFamily::ps) f.spec.alpha = in.number("alpha");
  else f.spec.sigma = in.number("sigma");
  rethrow_at(path, [&] {
    f.spec.validate();
    return 0;
  });
  f.latent = in.boolean("latent", true);
  in.finish();
  return f;
}

inline CopulaBlock parse_copula(const json& node, const std::string& path) {
  SpecReader in(node, path);
  CopulaBlock c;
  c.name = in.string("name", "u");
  c.spec.family = in.string("family");
  if (!default_copulas().contains(c.spec.family))
    throw ValidationError(in.child("family"), "unknown copula family '" + c.spec.family + "' (known: clayton, gumbel)");
  if (in.has("tau") == in.has("theta")) throw ValidationError(path, "give exactly one of tau or theta");
  if (in.has("tau")) {
    const double tau = in.number("tau");
    c.spec.theta = rethrow_at(in.child("tau"), [&] { return itau(c.spec.family, tau); });
  } else {
    c.spec.theta = in.number("theta");
  }
  c.spec.dim = in.count("dim");
  if (c.spec.dim < 2) throw ValidationError(in.child("dim"), "copula dimension must be at least 2");
  rethrow_at(path, [&] { return make_copula(c.spec); });
  c.latent = in.boolean("latent", true);
  in.finish();
  return c;
}

inline CureBlock parse_cure(const json& node, const std::string& path) {
  SpecReader in(node, path);
  CureBlock c;
  c.formula = in.string("formula");
  rethrow_at(in.child("formula"), [&] { return parse_formula(c.formula); });
  const std::string family = in.string("incidence");
  c.incidence.family = rethrow_at(in.child("incidence"), [&] { return parse_incidence_family(family); });
  c.incidence.link = in.has("link")
                         ? rethrow_at(in.child("link"), [&] { return parse_link(in.string("link")); })
                         : default_link(c.incidence.family);
  c.incidence.kappa = in.numbers("kappa");
  c.incidence.zeta = in.number("zeta", 1.0);
  rethrow_at(path, [&] {
    c.incidence.validate();
    return 0;
  });
  c.name = in.string("name", "cured");
  c.latent = in.boolean("latent", true);
  in.finish();
  return c;
}

inline OutcomeBlock parse_outcome(const json& node, const std::string& path) {
  SpecReader in(node, path);
  OutcomeBlock o;
  o.name = in.string("name");
  const std::string model = in.string("model");
  o.family = rethrow_at(in.child("model"), [&] { return parse_family(model); });
  if (in.has("formula")) {
    o.formula = in.string("formula");
    rethrow_at(in.child("formula"), [&] { return parse_formula(o.formula); });
    o.beta = in.numbers("beta");
  } else if (in.has("beta")) {
    o.beta = in.numbers("beta");
  }
  if (in.has("phi")) o.phi = in.numbers("phi");
  if (uses_phi(o.family) && !o.phi) throw ValidationError(in.child("phi"), "model '" + model + "' requires phi");
  if (!uses_phi(o.family) && o.phi)
    throw ValidationError(in.child("phi"), "model '" + model + "' takes no phi");
  o.baseline.name = in.string("dist");
  o.baseline.params = in.params("params");
  rethrow_at(in.child("dist"), [&] { return default_baselines().lookup(o.baseline); });
  o.u = in.string("u", "fresh");
  o.latent = in.boolean("latent", true);
  in.finish();
  return o;
}

inline std::vector<double> parse_grid(SpecReader& in) {
  const json& v = in.raw("grid");
  std::vector<double> grid;
  if (v.is_object()) {
    SpecReader g(v, in.child("grid"));
    const double from = g.number("from", 0.0);
    const double to = g.number("to");
    const double by = g.number("by");
    g.finish();
    grid = rethrow_at(in.child("grid"), [&] { return visit_grid(from, to, by); });
  } else {
    grid = in.numbers("grid");
  }
  rethrow_at(in.child("grid"), [&] {
    validate_visit_grid(grid);
    return 0;
  });
  return grid;
}

inline CensorStep parse_censor_step(const json& node, const std::string& path) {
  SpecReader in(node, path);
  CensorStep s;
  const std::string type = in.string("type");
  if (type == "admin") {
    s.kind = CensorStep::Kind::admin;
    s.events = in.strings("event");
    if (s.events.size() != 1) throw ValidationError(in.child("event"), "admin censoring takes a single event column");
    s.tau = in.number("tau");
    if (!(*s.tau > 0.0)) throw ValidationError(in.child("tau"), "tau must be positive");
    s.time = in.string("time", "time");
    s.status = in.has("status") ? in.strings("status") : std::vector<std::string>{"status"};
  } else if (type == "random") {
    s.kind = CensorStep::Kind::random;
    s.name = in.string("name");
    s.dist.name = in.string("dist");
    s.dist.params = in.params("params");
    rethrow_at(in.child("dist"), [&] { return default_baselines().lookup(s.dist); });
    s.latent = in.boolean("latent", true);
  } else if (type == "right") {
    s.kind = CensorStep::Kind::right;
    s.events = in.strings("event");
    if (s.events.empty()) throw ValidationError(in.child("event"), "at least one event column is required");
    if (in.has("censor")) s.censors = in.strings("censor");
    if (in.has("tau")) {
      s.tau = in.number("tau");
      if (!(*s.tau > 0.0)) throw ValidationError(in.child("tau"), "tau must be positive");
    }
    s.time = in.string("time", "time");
    if (in.has("status")) {
      s.status = in.strings("status");
    } else if (s.events.size() == 1) {
      s.status = {"status"};
    } else {
      for (std::size_t k = 0; k < s.events.size(); ++k) s.status.push_back("status" + std::to_string(k + 1));
    }
    if (s.status.size() != s.events.size())
      throw ValidationError(in.child("status"), "need one status column per event column");
  } else if (type == "interval_type1") {
    s.kind = CensorStep::Kind::interval_type1;
    s.events = in.strings("event");
    if (s.events.size() != 1) throw ValidationError(in.child("event"), "takes a single event column");
    const json& tau = in.raw("tau");
    if (tau.is_string()) {
      s.tau_column = tau.get<std::string>();
    } else {
      s.tau = in.number("tau");
      if (!(*s.tau > 0.0)) throw ValidationError(in.child("tau"), "tau must be positive");
    }
    s.left = in.string("left", "left");
    s.right = in.string("right", "right");
  } else if (type == "interval_type2") {
    s.kind = CensorStep::Kind::interval_type2;
    s.events = in.strings("event");
    if (s.events.size() != 1) throw ValidationError(in.child("event"), "takes a single event column");
    s.grid = parse_grid(in);
    s.prob = in.number("prob", 1.0);
    if (!(s.prob > 0.0 && s.prob <= 1.0)) throw ValidationError(in.child("prob"), "prob must lie in (0, 1]");
    s.left = in.string("left", "left");
    s.right = in.string("right", "right");
  } else {
    throw ValidationError(in.child("type"), "unknown censoring step '" + type +
                                                "' (known: admin, random, right, interval_type1, interval_type2)");
  }
  in.finish();
  return s;
}

template <class T, class Parse>
std::vector<T> parse_list(SpecReader& in, std::string_view key, Parse&& parse) {
  std::vector<T> out;
  if (!in.has(key)) return out;
  const json& v = in.raw(key);
  if (!v.is_array()) throw ValidationError(in.child(key), "expected an array");
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse(v[i], in.child(key) + "/" + std::to_string(i)));
  return out;
}

}  // namespace detail

/// Structural parse of a scenario document. Semantic checks that need data
/// (column references, coefficient lengths) happen in validate_scenario.
inline ScenarioSpec parse_scenario(const nlohmann::json& doc, std::filesystem::path base_dir = {}) {
  detail::SpecReader in(doc, "");
  ScenarioSpec s;
  s.base_dir = std::move(base_dir);
  s.seed = detail::parse_seed(in.raw("seed"), "/seed");
  if (in.has("data")) s.data = in.string("data");
  if (in.has("n")) s.n = in.count("n");
  else if (!s.data) throw ValidationError("/n", "required field is missing (or give a data file)");
  s.covariates = detail::parse_list<CovariateSpec>(in, "covariates", detail::parse_covariate);
  if (in.has("frailty")) s.frailty = detail::parse_frailty(in.raw("frailty"), "/frailty", s.n);
  if (in.has("copula")) s.copula = detail::parse_copula(in.raw("copula"), "/copula");
  if (in.has("cure")) s.cure = detail::parse_cure(in.raw("cure"), "/cure");
  s.outcomes = detail::parse_list<OutcomeBlock>(in, "outcomes", detail::parse_outcome);
  s.censoring = detail::parse_list<CensorStep>(in, "censoring", detail::parse_censor_step);
  if (in.has("output")) s.output = in.strings("output");
  in.mark("$schema");
  in.mark("description");
  in.finish();

  if (s.copula) {
    std::size_t consumers = 0;
    std::set<std::string> used;
    for (std::size_t k = 0; k < s.outcomes.size(); ++k) {
      const std::string& u = s.outcomes[k].u;
      if (u == "fresh" || u == "cure") continue;
      if (!used.insert(u).second)
        throw ValidationError("/outcomes/" + std::to_string(k) + "/u", "copula column '" + u + "' is used twice");
      ++consumers;
    }
    if (consumers != s.copula->spec.dim)
      throw ValidationError("/copula/dim", "copula has dimension " + std::to_string(s.copula->spec.dim) + " but " +
                                               std::to_string(consumers) + " outcome(s) consume it");
  }
  for (std::size_t k = 0; k < s.outcomes.size(); ++k) {
    const std::string path = "/outcomes/" + std::to_string(k) + "/u";
    const std::string& u = s.outcomes[k].u;
    if (u == "cure" && !s.cure) throw ValidationError(path, "u = \"cure\" needs a cure block");
    if (u == "fresh" || u == "cure") continue;
    bool found = false;
    if (s.copula)
      for (std::size_t j = 0; j < s.copula->spec.dim; ++j) found = found || s.copula->column(j) == u;
    if (!found) throw ValidationError(path, "'" + u + "' is not a copula column (use \"fresh\", \"cure\" or a copula column)");
  }
  return s;
}

inline ScenarioSpec load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("", "cannot open scenario file '" + file.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc, file.parent_path());
}

// ---------------------------------------------------------------- execution

/// What the check command needs to re-derive each row's distribution.
struct OutcomeTrace {
  std::string name;
  Family family = Family::ph;
  BaselinePtr baseline;
  LinearPredictors lp;
  std::string u;
};

struct CureTrace {
  IncidenceSpec incidence;
  std::vector<double> mu;
  std::vector<double> pi;
};

struct ScenarioResult {
  /// Every generated column, latent ones included.
  Table table;
  /// Columns selected for output (explicit list, or every non-latent column).
  std::vector<std::string> output;
  std::vector<std::string> latent;
  std::vector<OutcomeTrace> outcomes;
  std::optional<CureTrace> cure;
  std::optional<std::vector<double>> frailty_per_cluster;

  Table selected(bool keep_latent = false) const {
    if (!keep_latent) return table.select(output);
    std::vector<std::string> names = output;
    for (const auto& l : latent)
      if (std::find(names.begin(), names.end(), l) == names.end()) names.push_back(l);
    return table.select(names);
  }
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Run at this size instead of the spec's n (ignored with a data file).
  std::optional<std::size_t> n;
};

namespace detail {

class Runner {
 public:
  Runner(const ScenarioSpec& spec, RunOptions options, bool validating)
      : spec_(spec), seed_(options.seed.value_or(spec.seed)), validating_(validating) {
    if (spec.data) {
      std::filesystem::path p(*spec.data);
      if (p.is_relative()) p = spec.base_dir / p;
      at("/data", [&] { result_.table = read_csv(p.string()); });
      if (spec.n != 0 && spec.n != result_.table.n_rows() && !options.n)
        fail("/n", "n = " + std::to_string(spec.n) + " but the data file has " +
                       std::to_string(result_.table.n_rows()) + " rows");
      n_ = result_.table.n_rows();
    } else {
      n_ = options.n.value_or(spec.n);
      result_.table = Table(n_);
    }
  }

  ScenarioResult run() {
    for (const auto& c : result_.table.names()) result_.output.push_back(c);
    for (std::size_t k = 0; k < spec_.covariates.size(); ++k)
      at("/covariates/" + std::to_string(k), [&] { covariate(k, spec_.covariates[k]); });
    if (spec_.frailty) at("/frailty", [&] { frailty(*spec_.frailty); });
    if (spec_.copula) at("/copula", [&] { copula(*spec_.copula); });
    if (spec_.cure) at("/cure", [&] { cure(*spec_.cure); });
    for (std::size_t k = 0; k < spec_.outcomes.size(); ++k)
      at("/outcomes/" + std::to_string(k), [&] { outcome(k, spec_.outcomes[k]); });
    for (std::size_t k = 0; k < spec_.censoring.size(); ++k)
      at("/censoring/" + std::to_string(k), [&] { censor(k, spec_.censoring[k]); });
    if (spec_.output) {
      at("/output", [&] {
        for (const auto& name : *spec_.output)
          if (!result_.table.has(name)) throw DomainError("unknown output column '" + name + "'");
      });
      result_.output = *spec_.output;
    }
    return std::move(result_);
  }

 private:
  template <class Fn>
  void at(const std::string& path, Fn&& fn) {
    try {
      fn();
    } catch (const ValidationError&) {
      throw;
    } catch (const RuntimeError& e) {
      if (validating_) throw ValidationError(path, e.what());
      throw;
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    if (validating_) throw ValidationError(path, message);
    throw RuntimeError(path + ": " + message);
  }

  void add(Column column, bool latent) {
    const std::string name = column.name;
    result_.table.add(std::move(column));
    (latent ? result_.latent : result_.output).push_back(name);
  }

  void add_numeric(std::string name, std::vector<double> values, bool latent) {
    add(Column{std::move(name), std::move(values), {}, {}}, latent);
  }

  Rng stream(Stage stage, std::size_t block, std::size_t row) const { return row_stream(seed_, stage, block, row); }

  const std::vector<double>& numeric_column(const std::string& name) const {
    const Column& c = result_.table.column(name);
    if (!c.is_numeric()) throw DomainError("column '" + name + "' is not numeric");
    if (auto row = c.first_missing())
      throw DomainError("column '" + name + "' has a missing value at row " + std::to_string(*row + 1));
    return c.numeric();
  }

  void covariate(std::size_t block, const CovariateSpec& c) {
    if (c.kind == CovariateSpec::Kind::categorical) {
      std::vector<std::string> values(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double u = stream(Stage::covariates, block, i).uniform();
        double cumulative = 0.0;
        std::size_t pick = c.levels.size() - 1;
        for (std::size_t k = 0; k + 1 < c.levels.size(); ++k) {
          cumulative += c.probs[k];
          if (u < cumulative) {
            pick = k;
            break;
          }
        }
        values[i] = c.levels[pick];
      }
      add(Column{c.name, std::move(values), {}, c.levels}, c.latent);
      return;
    }
    std::vector<double> values(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      Rng rng = stream(Stage::covariates, block, i);
      values[i] = c.kind == CovariateSpec::Kind::normal ? rng.normal(c.a, c.b) : rng.uniform(c.a, c.b);
    }
    add_numeric(c.name, std::move(values), c.latent);
  }

  void frailty(const FrailtyBlock& f) {
    std::vector<std::size_t> index;
    std::size_t n_clusters = 0;
    if (f.generate_ids) {
      if (f.clusters && n_ % f.clusters != 0)
        throw DomainError("n = " + std::to_string(n_) + " is not a multiple of " + std::to_string(f.clusters) +
                          " clusters");
      const std::size_t size = f.clusters ? n_ / f.clusters : f.cluster_size;
      std::vector<double> ids(n_);
      for (std::size_t i = 0; i < n_; ++i) ids[i] = static_cast<double>(i / size + 1);
      index.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) index[i] = i / size;
      n_clusters = n_ == 0 ? 0 : index.back() + 1;
      add_numeric(f.cluster, std::move(ids), false);
    } else {
      const Column& c = result_.table.column(f.cluster);
      if (auto row = c.first_missing())
        throw DomainError("cluster column '" + f.cluster + "' has a missing value at row " + std::to_string(*row + 1));
      if (c.is_numeric()) index = cluster_index(std::span<const double>(c.numeric()));
      else index = cluster_index(std::span<const std::string>(c.categorical()));
      for (std::size_t k : index) n_clusters = std::max(n_clusters, k + 1);
    }
    std::vector<double> per_cluster(n_clusters);
    for (std::size_t k = 0; k < n_clusters; ++k) {
      Rng rng = stream(Stage::frailty, 0, k);
      per_cluster[k] = draw_frailty(f.spec, rng);
    }
    std::vector<double> w(n_);
    for (std::size_t i = 0; i < n_; ++i) w[i] = per_cluster[index[i]];
    result_.frailty_per_cluster = std::move(per_cluster);
    add_numeric(f.name, std::move(w), f.latent);
  }

  void copula(const CopulaBlock& c) {
    const CopulaPtr cop = make_copula(c.spec);
    UniformMatrix u(n_, c.spec.dim);
    for (std::size_t i = 0; i < n_; ++i) {
      Rng rng = stream(Stage::copula, 0, i);
      cop->sample(rng, u.row(i));
    }
    for (std::size_t j = 0; j < c.spec.dim; ++j) add_numeric(c.column(j), u.column(j), c.latent);
  }

  void cure(const CureBlock& c) {
    const DesignMatrix design = incidence_design(c.formula, result_.table);
    CureTrace trace{c.incidence, incidence_means(design, c.incidence), {}};
    trace.pi.resize(n_);
    cure_draws_.resize(n_);
    std::vector<double> cured(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double u = stream(Stage::cure, 0, i).uniform();
      trace.pi[i] = cure_fraction(c.incidence.family, trace.mu[i], c.incidence.zeta);
      cure_draws_[i] = inv_pgf_scalar(c.incidence.family, trace.mu[i], u, c.incidence.zeta);
      cured[i] = cure_draws_[i].cured() ? 1.0 : 0.0;
    }
    result_.cure = std::move(trace);
    add_numeric(c.name, std::move(cured), c.latent);
  }

  void outcome(std::size_t block, const OutcomeBlock& o) {
    const BaselinePtr baseline = default_baselines().lookup(o.baseline);
    const DesignMatrix design =
        o.formula.empty() ? build_design(FormulaAST{}, result_.table) : build_design(o.formula, result_.table);
    LinearPredictors lp = linear_predictors(o.family, design, o.beta, o.phi);
    std::vector<double> t(n_);
    if (o.u == "cure") {
      t = generate_with_cure(o.family, cure_draws_, lp, *baseline);
    } else {
      std::vector<double> u(n_);
      if (o.u == "fresh") {
        for (std::size_t i = 0; i < n_; ++i) u[i] = stream(Stage::outcomes, block, i).uniform();
      } else {
        u = numeric_column(o.u);
      }
      t = generate(o.family, u, lp, *baseline);
    }
    result_.outcomes.push_back(OutcomeTrace{o.name, o.family, baseline, std::move(lp), o.u});
    add_numeric(o.name, std::move(t), o.latent);
  }

  template <class Fn>
  void per_row(Fn&& fn) {
    for (std::size_t i = 0; i < n_; ++i) {
      try {
        fn(i);
      } catch (const DomainError& e) {
        throw DomainError("row " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }

  void censor(std::size_t block, const CensorStep& s) {
    using Kind = CensorStep::Kind;
    switch (s.kind) {
      case Kind::random: {
        const BaselinePtr dist = default_baselines().lookup(s.dist);
        std::vector<double> c(n_);
        for (std::size_t i = 0; i < n_; ++i) c[i] = dist->quantile_upper(stream(Stage::censoring, block, i).uniform());
        add_numeric(s.name, std::move(c), s.latent);
        return;
      }
      case Kind::admin:
      case Kind::right: {
        std::vector<const std::vector<double>*> events;
        for (const auto& e : s.events) events.push_back(&numeric_column(e));
        std::vector<const std::vector<double>*> censors;
        for (const auto& c : s.censors) censors.push_back(&numeric_column(c));
        std::vector<double> time(n_);
        std::vector<std::vector<double>> status(s.events.size(), std::vector<double>(n_));
        per_row([&](std::size_t i) {
          std::vector<double> ev, cs;
          for (auto* e : events) ev.push_back((*e)[i]);
          for (auto* c : censors) cs.push_back((*c)[i]);
          if (s.tau) cs.push_back(*s.tau);
          const CompetingRecord r = competing_censor(ev, cs);
          time[i] = r.time;
          for (std::size_t k = 0; k < ev.size(); ++k) status[k][i] = r.cause == k + 1 ? 1.0 : 0.0;
        });
        add_numeric(s.time, std::move(time), false);
        for (std::size_t k = 0; k < s.status.size(); ++k) add_numeric(s.status[k], std::move(status[k]), false);
        return;
      }
      case Kind::interval_type1: {
        const auto& t = numeric_column(s.events.front());
        const std::vector<double>* tau_col = s.tau_column.empty() ? nullptr : &numeric_column(s.tau_column);
        std::vector<double> left(n_), right(n_);
        per_row([&](std::size_t i) {
          const IntervalRecord r = rinterval_type1(t[i], tau_col ? (*tau_col)[i] : *s.tau);
          left[i] = r.left;
          right[i] = r.right;
        });
        add_numeric(s.left, std::move(left), false);
        add_numeric(s.right, std::move(right), false);
        return;
      }
      case Kind::interval_type2: {
        const auto& t = numeric_column(s.events.front());
        std::vector<double> left(n_), right(n_);
        per_row([&](std::size_t i) {
          Rng rng = stream(Stage::censoring, block, i);
          const IntervalRecord r = rinterval_type2(t[i], s.grid, s.prob, rng);
          left[i] = r.left;
          right[i] = r.right;
        });
        add_numeric(s.left, std::move(left), false);
        add_numeric(s.right, std::move(right), false);
        return;
      }
    }
  }

  const ScenarioSpec& spec_;
  std::uint64_t seed_;
  bool validating_;
  std::size_t n_ = 0;
  ScenarioResult result_;
  std::vector<CureDraw> cure_draws_;
};

}  // namespace detail

/// Semantic validation: a dry run at n = 0 (or over the full data file).
/// Throws ValidationError with a path into the document.
inline void validate_scenario(const ScenarioSpec& spec) {
  RunOptions options;
  if (!spec.data) options.n = 0;
  detail::Runner(spec, options, true).run();
}

inline ScenarioResult run_scenario(const ScenarioSpec& spec, RunOptions options = {}) {
  validate_scenario(spec);
  return detail::Runner(spec, options, false).run();
}

}  // namespace survgen
