#pragma once

// Promotion-time / mixture cure machinery.
//
// The latent count N has probability-generating function A_p and cure
// fraction pi = A_p(0). A uniform U below pi marks a cured subject (infinite
// failure time); otherwise V = A_p^{-1}(U) replaces U in the latency model:
//
//   family     A_p(s)                          A_p^{-1}(u)
//   bernoulli  (1 - mu) + mu s                 (u - 1 + mu) / mu
//   poisson    exp{-mu (1 - s)}                (log u + mu) / mu
//   negbin     [1 + zeta mu (1 - s)]^{-1/zeta}  1 - (u^{-zeta} - 1) / (zeta mu)
//   bell       exp{e^{s theta} - e^theta}       log(log u + e^theta) / theta,  theta = W0(mu)
//
// The incidence predictor z kappa carries an intercept, unlike latency predictors.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survgen/error.hpp"
#include "survgen/formula.hpp"
#include "survgen/models.hpp"
#include "survgen/special.hpp"

namespace survgen {

/// Principal branch of the Lambert W function for x >= 0.
///
/// Initial guess log1p(x) below e and L1 - L2 + L2/L1 (L1 = log x,
/// L2 = log L1) above it, then Halley iteration on w e^w - x.
inline double lambert_w0(double x) {
  if (!(x >= 0.0)) throw DomainError("lambert_w0: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  double w;
  if (x < std::numbers::e) {
    w = std::log1p(x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

enum class IncidenceFamily { bernoulli, poisson, negbin, bell };
enum class Link { logit, probit, cloglog, cauchit, log, identity, sqrt };

inline std::string_view to_string(IncidenceFamily f) {
  switch (f) {
    case IncidenceFamily::bernoulli: return "bernoulli";
    case IncidenceFamily::poisson: return "poisson";
    case IncidenceFamily::negbin: return "negbin";
    case IncidenceFamily::bell: return "bell";
  }
  return "?";
}

inline std::string_view to_string(Link l) {
  switch (l) {
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::cloglog: return "cloglog";
    case Link::cauchit: return "cauchit";
    case Link::log: return "log";
    case Link::identity: return "identity";
    case Link::sqrt: return "sqrt";
  }
  return "?";
}

inline IncidenceFamily parse_incidence_family(std::string_view name) {
  for (auto f : {IncidenceFamily::bernoulli, IncidenceFamily::poisson, IncidenceFamily::negbin, IncidenceFamily::bell})
    if (to_string(f) == name) return f;
  throw NotFoundError("unknown incidence family '" + std::string(name) + "' (known: bernoulli, poisson, negbin, bell)");
}

inline Link parse_link(std::string_view name) {
  for (auto l : {Link::logit, Link::probit, Link::cloglog, Link::cauchit, Link::log, Link::identity, Link::sqrt})
    if (to_string(l) == name) return l;
  throw NotFoundError("unknown link '" + std::string(name) + "'");
}

inline bool link_allowed(IncidenceFamily f, Link l) {
  const bool binary_link = l == Link::logit || l == Link::probit || l == Link::cloglog || l == Link::cauchit;
  return f == IncidenceFamily::bernoulli ? binary_link : !binary_link;
}

inline Link default_link(IncidenceFamily f) {
  return f == IncidenceFamily::bernoulli ? Link::logit : Link::log;
}

struct IncidenceSpec {
  IncidenceFamily family = IncidenceFamily::bernoulli;
  Link link = Link::logit;
  std::vector<double> kappa;
  /// Extra negative-binomial parameter; ignored by the other families.
  double zeta = 1.0;

  void validate() const {
    if (!link_allowed(family, link))
      throw DomainError("link '" + std::string(to_string(link)) + "' is not available for the " +
                        std::string(to_string(family)) + " incidence family");
    if (family == IncidenceFamily::negbin && !(zeta > 0.0 && std::isfinite(zeta)))
      throw DomainError("negbin incidence requires zeta > 0");
  }
};

/// mu = E(N) from the incidence linear predictor.
inline double incidence_mean(IncidenceFamily family, Link link, double eta) {
  if (!std::isfinite(eta)) throw DomainError("incidence_mean: linear predictor must be finite");
  if (!link_allowed(family, link))
    throw DomainError("link '" + std::string(to_string(link)) + "' is not available for " +
                      std::string(to_string(family)));
  switch (link) {
    case Link::logit: return 1.0 / (1.0 + std::exp(-eta));
    case Link::probit: return special::normal_cdf(eta);
    case Link::cloglog: return -std::expm1(-std::exp(eta));
    case Link::cauchit: return 0.5 + std::atan(eta) / std::numbers::pi;
    case Link::log: return std::exp(eta);
    case Link::identity:
      if (!(eta > 0.0)) throw DomainError("identity link produced a non-positive mean (eta = " + std::to_string(eta) + ")");
      return eta;
    case Link::sqrt:
      if (!(eta > 0.0)) throw DomainError("sqrt link requires eta > 0 (eta = " + std::to_string(eta) + ")");
      return eta * eta;
  }
  return 0.0;
}

namespace detail {
inline void check_mean(IncidenceFamily family, double mu, double zeta) {
  if (family == IncidenceFamily::bernoulli) {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("bernoulli incidence requires 0 < mu <= 1");
  } else if (!(mu > 0.0 && std::isfinite(mu))) {
    throw DomainError(std::string(to_string(family)) + " incidence requires mu > 0");
  }
  if (family == IncidenceFamily::negbin && !(zeta > 0.0)) throw DomainError("negbin incidence requires zeta > 0");
}
}  // namespace detail

/// A_p(s) for s in [0, 1].
inline double pgf(IncidenceFamily family, double mu, double s, double zeta = 1.0) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf: s must lie in [0, 1]");
  detail::check_mean(family, mu, zeta);
  switch (family) {
    case IncidenceFamily::bernoulli: return (1.0 - mu) + mu * s;
    case IncidenceFamily::poisson: return std::exp(-mu * (1.0 - s));
    case IncidenceFamily::negbin: return std::pow(1.0 + zeta * mu * (1.0 - s), -1.0 / zeta);
    case IncidenceFamily::bell: {
      const double theta = lambert_w0(mu);
      return std::exp(std::exp(s * theta) - std::exp(theta));
    }
  }
  return 0.0;
}

/// pi = P(N = 0) = A_p(0).
inline double cure_fraction(IncidenceFamily family, double mu, double zeta = 1.0) {
  return pgf(family, mu, 0.0, zeta);
}

/// Result of inverting A_p: either cured (infinite time) or a latency uniform v.
struct CureDraw {
  std::optional<double> v;

  bool cured() const { return !v.has_value(); }
  static CureDraw cured_draw() { return {}; }
};

/// A_p^{-1}(u), or cured when u <= pi.
inline CureDraw inv_pgf_scalar(IncidenceFamily family, double mu, double u, double zeta = 1.0) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("inv_pgf: u must lie in (0, 1)");
  detail::check_mean(family, mu, zeta);
  if (u <= cure_fraction(family, mu, zeta)) return CureDraw::cured_draw();
  double v = 0.0;
  switch (family) {
    case IncidenceFamily::bernoulli: v = (u - (1.0 - mu)) / mu; break;
    case IncidenceFamily::poisson: v = (std::log(u) + mu) / mu; break;
    case IncidenceFamily::negbin: v = 1.0 - std::expm1(-zeta * std::log(u)) / (zeta * mu); break;
    case IncidenceFamily::bell: {
      const double theta = lambert_w0(mu);
      v = std::log(std::log(u) + std::exp(theta)) / theta;
      break;
    }
  }
  if (!(v > 0.0)) return CureDraw::cured_draw();
  return CureDraw{std::min(v, std::nextafter(1.0, 0.0))};
}

/// Per-row means mu_i from the incidence formula (with intercept) and kappa.
inline std::vector<double> incidence_means(const DesignMatrix& design, const IncidenceSpec& incidence) {
  incidence.validate();
  const std::vector<double> eta = design.linear_predictor(incidence.kappa);
  std::vector<double> mu(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    try {
      mu[i] = incidence_mean(incidence.family, incidence.link, eta[i]);
      detail::check_mean(incidence.family, mu[i], incidence.zeta);
    } catch (const DomainError& e) {
      throw DomainError("row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return mu;
}

inline DesignMatrix incidence_design(std::string_view formula, const Table& table) {
  return build_design(formula, table, DesignOptions{.intercept = true});
}

/// Formula-level inv_pgf: one CureDraw per row.
inline std::vector<CureDraw> inv_pgf(std::string_view formula, const Table& table, const IncidenceSpec& incidence,
                                     std::span<const double> u) {
  const DesignMatrix design = incidence_design(formula, table);
  const std::vector<double> mu = incidence_means(design, incidence);
  if (u.size() != mu.size())
    throw DomainError("u has " + std::to_string(u.size()) + " entries but the table has " +
                      std::to_string(mu.size()) + " rows");
  std::vector<CureDraw> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = inv_pgf_scalar(incidence.family, mu[i], u[i], incidence.zeta);
  return out;
}

/// Latency generation with cure: +inf for cured rows, the family's inversion of v otherwise.
inline std::vector<double> generate_with_cure(Family f, std::span<const CureDraw> draws, const LinearPredictors& lp,
                                              const BaselineDistribution& baseline) {
  if (draws.size() != lp.eta1.size()) throw DomainError("cure draws and predictors differ in length");
  std::vector<double> times(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i)
    times[i] = draws[i].cured() ? std::numeric_limits<double>::infinity()
                                : generate_one(f, *draws[i].v, lp.row(i), baseline);
  return times;
}

}  // namespace survgen
