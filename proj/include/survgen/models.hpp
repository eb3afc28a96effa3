#pragma once

// Failure-time generation for the six regression families.
//
// Every family is a special case of one of two survival models written in
// terms of the baseline S0 and two linear predictors (eta1, eta2):
//
//   Yang–Prentice   S(t) = [1 + R0(t) e^{eta1 - eta2}]^{-e^{eta2}},  R0 = (1 - S0) / S0
//   extended hazard S(t) = S0(t / e^{eta1})^{e^{eta1 + eta2}}
//
// and T = a^{-1}(S0^{-1}(g^{-1}(U))) inverts them exactly. The families map
// a single predictor eta = x beta + w (and eta_phi = x phi + w) onto the pair:
//
//   aft (eta, -eta)  ah (eta, 0)  ph (0, eta)  eh (eta, eta_phi)   -> extended hazard
//   po  (eta, 0)     yp (eta, eta_phi)                              -> Yang–Prentice

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survgen/baselines.hpp"
#include "survgen/error.hpp"
#include "survgen/formula.hpp"

namespace survgen {

enum class Family { aft, ah, ph, po, eh, yp };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::aft: return "aft";
    case Family::ah: return "ah";
    case Family::ph: return "ph";
    case Family::po: return "po";
    case Family::eh: return "eh";
    case Family::yp: return "yp";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::aft, Family::ah, Family::ph, Family::po, Family::eh, Family::yp})
    if (to_string(f) == name) return f;
  throw NotFoundError("unknown model family '" + std::string(name) + "' (known: aft, ah, ph, po, eh, yp)");
}

/// Families with a second coefficient vector phi.
constexpr bool uses_phi(Family f) { return f == Family::eh || f == Family::yp; }

/// Families generated through the Yang–Prentice inversion (the rest use extended hazard).
constexpr bool is_yang_prentice(Family f) { return f == Family::po || f == Family::yp; }

struct Predictors {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// Map a family's predictor(s) onto the (eta1, eta2) pair of its parent model.
/// `eta_phi` is ignored for single-predictor families.
constexpr Predictors family_predictors(Family f, double eta, double eta_phi = 0.0) {
  switch (f) {
    case Family::aft: return {eta, -eta};
    case Family::ah: return {eta, 0.0};
    case Family::ph: return {0.0, eta};
    case Family::po: return {eta, 0.0};
    case Family::eh:
    case Family::yp: return {eta, eta_phi};
  }
  return {};
}

constexpr double kEtaLimit = 700.0;

constexpr double clamp_eta(double eta) { return std::clamp(eta, -kEtaLimit, kEtaLimit); }

namespace detail {
inline void check_unit(double u, const char* what) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError(std::string(what) + ": u must lie in (0, 1)");
}
}  // namespace detail

/// Yang–Prentice inversion. With k1 = e^eta1, k2 = e^eta2:
/// v = (u^{-1/k2} - 1) k2 / k1, s = 1 / (1 + v), t = S0^{-1}(s).
/// Computed on the cumulative-hazard scale: -log s = log1p(v).
inline double gen_yp(double u, double eta1, double eta2, const BaselineDistribution& baseline) {
  detail::check_unit(u, "gen_yp");
  eta1 = clamp_eta(eta1);
  eta2 = clamp_eta(eta2);
  const double a = -std::log(u) * std::exp(-eta2);
  const double v = std::expm1(a) * std::exp(eta2 - eta1);
  if (std::isfinite(v)) return baseline.quantile_cumulative_hazard(std::log1p(v));
  // inf * 0 or overflow: work with log v.
  const double log_v = a + std::log1p(-std::exp(-a)) + (eta2 - eta1);
  const double h = log_v > 0.0 ? log_v + std::log1p(std::exp(-log_v)) : std::log1p(std::exp(log_v));
  return baseline.quantile_cumulative_hazard(h);
}

/// Extended-hazard inversion: s = u^{e^{-(eta1 + eta2)}}, t = e^{eta1} S0^{-1}(s).
inline double gen_eh(double u, double eta1, double eta2, const BaselineDistribution& baseline) {
  detail::check_unit(u, "gen_eh");
  eta1 = clamp_eta(eta1);
  eta2 = clamp_eta(eta2);
  const double h = -std::log(u) * std::exp(-clamp_eta(eta1 + eta2));
  return std::exp(eta1) * baseline.quantile_cumulative_hazard(h);
}

/// Yang–Prentice survival at t.
inline double yp_survival(double t, double eta1, double eta2, const BaselineDistribution& baseline) {
  eta1 = clamp_eta(eta1);
  eta2 = clamp_eta(eta2);
  if (std::isinf(t)) return 0.0;
  const double r0 = std::expm1(baseline.cumulative_hazard(t));
  return std::exp(-std::exp(eta2) * std::log1p(r0 * std::exp(eta1 - eta2)));
}

/// Extended-hazard survival at t.
inline double eh_survival(double t, double eta1, double eta2, const BaselineDistribution& baseline) {
  eta1 = clamp_eta(eta1);
  eta2 = clamp_eta(eta2);
  if (std::isinf(t)) return 0.0;
  const double h0 = baseline.cumulative_hazard(t / std::exp(eta1));
  return std::exp(-h0 * std::exp(clamp_eta(eta1 + eta2)));
}

/// Generate one time for a family from already mapped predictors.
inline double generate_one(Family f, double u, Predictors p, const BaselineDistribution& baseline) {
  return is_yang_prentice(f) ? gen_yp(u, p.eta1, p.eta2, baseline) : gen_eh(u, p.eta1, p.eta2, baseline);
}

/// S(t | x) of a family at mapped predictors.
inline double family_survival(Family f, double t, Predictors p, const BaselineDistribution& baseline) {
  return is_yang_prentice(f) ? yp_survival(t, p.eta1, p.eta2, baseline)
                             : eh_survival(t, p.eta1, p.eta2, baseline);
}

struct ModelSpec {
  Family family = Family::ph;
  std::vector<double> beta;
  std::optional<std::vector<double>> phi;
  BaselineSpec baseline;
};

struct LinearPredictors {
  std::vector<double> eta1;
  std::vector<double> eta2;

  Predictors row(std::size_t i) const { return {eta1[i], eta2[i]}; }
};

/// eta = X beta + w (and X phi + w), mapped through the family.
inline LinearPredictors linear_predictors(Family f, const DesignMatrix& design, const std::vector<double>& beta,
                                          const std::optional<std::vector<double>>& phi = std::nullopt) {
  if (uses_phi(f) && !phi) throw DomainError(std::string(to_string(f)) + " model requires phi");
  if (!uses_phi(f) && phi)
    throw DomainError(std::string(to_string(f)) + " model takes a single coefficient vector; phi is not allowed");
  const std::vector<double> eta = design.linear_predictor(beta);
  std::vector<double> eta_phi;
  if (phi) eta_phi = design.linear_predictor(*phi);
  LinearPredictors lp;
  lp.eta1.resize(design.n_rows);
  lp.eta2.resize(design.n_rows);
  for (std::size_t i = 0; i < design.n_rows; ++i) {
    const Predictors p = family_predictors(f, eta[i], phi ? eta_phi[i] : 0.0);
    lp.eta1[i] = p.eta1;
    lp.eta2[i] = p.eta2;
  }
  return lp;
}

inline std::vector<double> generate(Family f, std::span<const double> u, const LinearPredictors& lp,
                                    const BaselineDistribution& baseline) {
  if (u.size() != lp.eta1.size())
    throw DomainError("u has " + std::to_string(u.size()) + " entries but there are " +
                      std::to_string(lp.eta1.size()) + " rows");
  std::vector<double> times(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) times[i] = generate_one(f, u[i], lp.row(i), baseline);
  return times;
}

inline std::vector<double> generate(Family f, std::span<const double> u, const DesignMatrix& design,
                                    const std::vector<double>& beta,
                                    const std::optional<std::vector<double>>& phi,
                                    const BaselineDistribution& baseline) {
  return generate(f, u, linear_predictors(f, design, beta, phi), baseline);
}

/// The formula-level entry point: parse, build the design on `table`, generate.
inline std::vector<double> generate(Family f, std::span<const double> u, std::string_view formula,
                                    const Table& table, const std::vector<double>& beta,
                                    const std::optional<std::vector<double>>& phi,
                                    const BaselineDistribution& baseline) {
  return generate(f, u, build_design(formula, table), beta, phi, baseline);
}

}  // namespace survgen
