#pragma once

// Distributional self-check of a scenario, pooled over replicate runs with
// seeds seed, seed + 1, ...:
//
//   outcome PIT     S(t_i | x_i) is U(0,1) for fresh or copula uniforms; with
//                   a cure block, (A_p(S) - pi_i) / (1 - pi_i) over uncured rows
//   cure fraction   cured share against the mean of pi_i
//   copula          uniform margins and pairwise Kendall tau against the target
//   frailty         per-cluster moments (gamma, gaussian) or the Laplace transform (ps)
//   censoring       containment L < T <= R, time <= T and status consistency
//
// KS checks use the 0.999 asymptotic critical value; moment checks allow
// four standard errors.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "survgen/cure.hpp"
#include "survgen/scenario.hpp"
#include "survgen/verify.hpp"

namespace survgen {

struct CheckLine {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::size_t reps = 0;
  std::size_t rows = 0;
  std::vector<CheckLine> lines;

  bool ok() const {
    for (const auto& l : lines)
      if (!l.pass) return false;
    return true;
  }
};

inline void print_report(const CheckReport& report, std::ostream& out) {
  out << "replicates: " << report.reps << ", rows per replicate: " << report.rows << '\n';
  for (const auto& l : report.lines) {
    out << (l.pass ? "ok    " : "FAIL  ") << l.name << "  statistic=" << l.statistic << "  tolerance=" << l.tolerance
        << '\n';
  }
  out << (report.ok() ? "all checks passed" : "some checks failed") << '\n';
}

namespace detail {

inline CheckLine bounded(std::string name, double statistic, double tolerance) {
  return CheckLine{std::move(name), statistic, tolerance, std::abs(statistic) <= tolerance};
}

struct Pooled {
  std::vector<std::vector<double>> pit;  // per outcome
  double cured = 0.0;
  double pi_sum = 0.0;
  double pi_var = 0.0;
  std::size_t cure_rows = 0;
  std::vector<std::vector<double>> copula_cols;
  std::vector<double> frailty;
  std::size_t containment_violations = 0;
  std::size_t containment_checked = 0;
};

inline void check_censoring(const ScenarioSpec& spec, const Table& table, Pooled& pool) {
  for (const auto& step : spec.censoring) {
    using Kind = CensorStep::Kind;
    if (step.kind == Kind::random) continue;
    const auto& t = table.numeric(step.events.front());
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      bool good = true;
      if (step.kind == Kind::interval_type1 || step.kind == Kind::interval_type2) {
        const double l = table.numeric(step.left)[i];
        const double r = table.numeric(step.right)[i];
        good = l >= 0.0 && l < t[i] && t[i] <= r;
      } else {
        const double time = table.numeric(step.time)[i];
        double observed = 0.0;
        for (std::size_t k = 0; k < step.events.size(); ++k) {
          const double tk = table.numeric(step.events[k])[i];
          const double sk = table.numeric(step.status[k])[i];
          good = good && time <= tk && (sk == 0.0 || time == tk);
          observed += sk;
        }
        good = good && observed <= 1.0;
      }
      ++pool.containment_checked;
      if (!good) ++pool.containment_violations;
    }
  }
}

}  // namespace detail

inline CheckReport check_scenario(const ScenarioSpec& spec, std::size_t reps, std::optional<std::uint64_t> seed = {}) {
  if (reps == 0) throw DomainError("check: need at least one replicate");
  const std::uint64_t base = seed.value_or(spec.seed);
  detail::Pooled pool;
  pool.pit.resize(spec.outcomes.size());
  if (spec.copula) pool.copula_cols.resize(spec.copula->spec.dim);
  CheckReport report;
  report.reps = reps;

  for (std::size_t r = 0; r < reps; ++r) {
    const ScenarioResult res = run_scenario(spec, RunOptions{base + r, std::nullopt});
    const Table& table = res.table;
    report.rows = table.n_rows();

    for (std::size_t k = 0; k < res.outcomes.size(); ++k) {
      const OutcomeTrace& o = res.outcomes[k];
      const auto& t = table.numeric(o.name);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = family_survival(o.family, t[i], o.lp.row(i), *o.baseline);
        if (o.u == "cure") {
          if (std::isinf(t[i])) continue;
          const double pi = res.cure->pi[i];
          const double a = pgf(res.cure->incidence.family, res.cure->mu[i], s, res.cure->incidence.zeta);
          pool.pit[k].push_back((a - pi) / (1.0 - pi));
        } else {
          pool.pit[k].push_back(s);
        }
      }
    }
    if (res.cure) {
      const auto& cured = table.numeric(spec.cure->name);
      for (std::size_t i = 0; i < cured.size(); ++i) {
        pool.cured += cured[i];
        pool.pi_sum += res.cure->pi[i];
        pool.pi_var += res.cure->pi[i] * (1.0 - res.cure->pi[i]);
      }
      pool.cure_rows += cured.size();
    }
    if (spec.copula) {
      for (std::size_t j = 0; j < spec.copula->spec.dim; ++j) {
        const auto& u = table.numeric(spec.copula->column(j));
        pool.copula_cols[j].insert(pool.copula_cols[j].end(), u.begin(), u.end());
      }
    }
    if (res.frailty_per_cluster)
      pool.frailty.insert(pool.frailty.end(), res.frailty_per_cluster->begin(), res.frailty_per_cluster->end());
    detail::check_censoring(spec, table, pool);
  }

  for (std::size_t k = 0; k < spec.outcomes.size(); ++k) {
    const auto& pit = pool.pit[k];
    if (pit.empty()) continue;
    report.lines.push_back(detail::bounded("outcome '" + spec.outcomes[k].name + "' PIT KS", ks_uniform(pit),
                                           ks_critical(pit.size(), 0.999)));
  }
  if (spec.cure && pool.cure_rows > 0) {
    const double n = static_cast<double>(pool.cure_rows);
    report.lines.push_back(detail::bounded("cured fraction - mean pi", (pool.cured - pool.pi_sum) / n,
                                           4.0 * std::sqrt(pool.pi_var) / n + 1e-12));
  }
  if (spec.copula && !pool.copula_cols.front().empty()) {
    for (std::size_t j = 0; j < pool.copula_cols.size(); ++j)
      report.lines.push_back(detail::bounded("copula margin " + spec.copula->column(j) + " KS",
                                             ks_uniform(pool.copula_cols[j]),
                                             ks_critical(pool.copula_cols[j].size(), 0.999)));
    const std::size_t m = std::min<std::size_t>(pool.copula_cols.front().size(), 5000);
    if (m >= 2) {
      const double target = make_copula(spec.copula->spec)->kendall_tau();
      const double nm = static_cast<double>(m);
      const double se = std::sqrt(2.0 * (2.0 * nm + 5.0) / (9.0 * nm * (nm - 1.0)));
      for (std::size_t a = 0; a < pool.copula_cols.size(); ++a)
        for (std::size_t b = a + 1; b < pool.copula_cols.size(); ++b) {
          const std::span<const double> x(pool.copula_cols[a].data(), m);
          const std::span<const double> y(pool.copula_cols[b].data(), m);
          report.lines.push_back(detail::bounded(
              "copula tau(" + spec.copula->column(a) + ", " + spec.copula->column(b) + ") - target",
              kendall_tau(x, y) - target, 4.0 * se));
        }
    }
  }
  if (spec.frailty && pool.frailty.size() >= 2) {
    const FrailtySpec& f = spec.frailty->spec;
    const double k = static_cast<double>(pool.frailty.size());
    if (f.family == FrailtyFamily::ps) {
      double mean = 0.0;
      for (double w : pool.frailty) mean += std::exp(-std::exp(w));
      mean /= k;
      const double target = std::exp(-1.0);
      const double var = std::exp(-std::pow(2.0, f.alpha)) - target * target;
      report.lines.push_back(detail::bounded("frailty Laplace transform at s=1 - exp(-1)", mean - target,
                                             4.0 * std::sqrt(var / k) + 1e-12));
    } else {
      const bool gamma = f.family == FrailtyFamily::gamma;
      double mean = 0.0;
      for (double w : pool.frailty) mean += gamma ? std::exp(w) : w;
      mean /= k;
      const double target = gamma ? 1.0 : 0.0;
      report.lines.push_back(detail::bounded(std::string("frailty mean of ") + (gamma ? "exp(w)" : "w") + " - " +
                                                 (gamma ? "1" : "0"),
                                             mean - target, 4.0 * f.sigma / std::sqrt(k)));
    }
  }
  if (pool.containment_checked > 0)
    report.lines.push_back(detail::bounded("censoring containment violations",
                                           static_cast<double>(pool.containment_violations), 0.0));
  return report;
}

}  // namespace survgen
