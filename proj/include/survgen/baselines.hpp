#pragma once

// Baseline survival distributions S0(t | theta) and the name -> constructor
// registry used to resolve them from scenario documents.
//
// Built-in parameterizations (t >= 0):
//   exp(rate)                    S(t) = exp(-rate t)
//   weibull(shape, scale)        S(t) = exp(-(t/scale)^shape)
//   llogis(shape, scale)         S(t) = 1 / (1 + (t/scale)^shape)
//   lnorm(meanlog, sdlog)        S(t) = 1 - Phi((log t - meanlog) / sdlog)
//   gompertz(shape, rate)        H(t) = (rate/shape) (exp(shape t) - 1)
//   gengamma.orig(shape, scale, k)  (t/scale)^shape ~ Gamma(k, 1)
//   unif(min, max)               uniform on [min, max]; used for censoring draws

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "survgen/error.hpp"
#include "survgen/special.hpp"

namespace survgen {

using Params = std::map<std::string, double, std::less<>>;

struct BaselineSpec {
  std::string name;
  Params params;
};

/// Interface every baseline implements. Public members validate their
/// arguments and forward to the protected hooks.
class BaselineDistribution {
 public:
  virtual ~BaselineDistribution() = default;

  virtual std::string_view name() const = 0;

  double survival(double t) const {
    check_time(t, "survival");
    return do_survival(t);
  }

  double density(double t) const {
    check_time(t, "density");
    return do_density(t);
  }

  double hazard(double t) const {
    check_time(t, "hazard");
    return do_hazard(t);
  }

  double cumulative_hazard(double t) const {
    check_time(t, "cumulative_hazard");
    return do_cumulative_hazard(t);
  }

  /// Baseline odds R0(t) = (1 - S0(t)) / S0(t).
  double odds(double t) const {
    check_time(t, "odds");
    const double h = do_cumulative_hazard(t);
    const double r = std::expm1(h);
    if (!std::isfinite(r)) throw DomainError("odds: survival is zero at t = " + std::to_string(t));
    return r;
  }

  /// Upper-tail quantile: the t with S0(t) = p.
  double quantile_upper(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile_upper: p must lie in (0, 1)");
    return do_quantile_upper(p);
  }

  /// The t with H0(t) = h, i.e. quantile_upper(exp(-h)) without the round
  /// trip through exp. h = 0 gives 0 and h = inf gives inf.
  double quantile_cumulative_hazard(double h) const {
    if (!(h >= 0.0)) throw DomainError("quantile_cumulative_hazard: h must be non-negative");
    if (h == 0.0) return 0.0;
    if (std::isinf(h)) return std::numeric_limits<double>::infinity();
    return do_quantile_cumulative_hazard(h);
  }

 protected:
  virtual double do_survival(double t) const = 0;
  virtual double do_density(double t) const = 0;
  virtual double do_quantile_upper(double p) const = 0;

  virtual double do_cumulative_hazard(double t) const { return -std::log(do_survival(t)); }

  virtual double do_hazard(double t) const {
    const double s = do_survival(t);
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return do_density(t) / s;
  }

  virtual double do_quantile_cumulative_hazard(double h) const {
    const double p = std::exp(-h);
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    if (p >= 1.0) return 0.0;
    return do_quantile_upper(p);
  }

 private:
  static void check_time(double t, const char* what) {
    if (!(t >= 0.0)) throw DomainError(std::string(what) + ": t must be non-negative");
  }
};

using BaselinePtr = std::shared_ptr<const BaselineDistribution>;

/// Solve S(t) = p by bracketing on [0, 2^k] and safeguarded Newton steps.
/// `survival` must be continuous and non-increasing with S(0) = 1.
template <class Survival, class Density>
double invert_survival(const Survival& survival, const Density& density, double p,
                       double tolerance = 1e-12) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("invert_survival: p must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (survival(hi) > p) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 1100) throw DomainError("invert_survival: no bracket found");
  }
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double residual = survival(t) - p;
    if (std::abs(residual) < tolerance) return t;
    if (residual > 0.0)
      lo = t;
    else
      hi = t;
    const double f = density(t);
    double next = f > 0.0 ? t + residual / f : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    t = next;
  }
  return t;
}

namespace detail {

/// Pulls named parameters out of a Params map and rejects leftovers.
class ParamReader {
 public:
  ParamReader(std::string_view dist, const Params& params) : dist_(dist), params_(params) {}

  double required(std::string_view key) {
    const auto it = params_.find(key);
    if (it == params_.end())
      throw DomainError(dist_ + ": missing parameter '" + std::string(key) + "'");
    used_.insert(std::string(key));
    return it->second;
  }

  double optional(std::string_view key, double fallback) {
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    used_.insert(std::string(key));
    return it->second;
  }

  double positive(std::string_view key) {
    const double v = required(key);
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(dist_ + ": parameter '" + std::string(key) + "' must be positive and finite");
    return v;
  }

  double finite(std::string_view key) {
    const double v = required(key);
    if (!std::isfinite(v))
      throw DomainError(dist_ + ": parameter '" + std::string(key) + "' must be finite");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : params_) {
      if (!used_.count(key)) throw DomainError(dist_ + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string dist_;
  const Params& params_;
  std::set<std::string> used_;
};

}  // namespace detail

class Exponential final : public BaselineDistribution {
 public:
  explicit Exponential(double rate) : rate_(rate) {
    if (!(rate > 0.0)) throw DomainError("exp: rate must be positive");
  }
  std::string_view name() const override { return "exp"; }
  double rate() const { return rate_; }

 protected:
  double do_survival(double t) const override { return std::exp(-rate_ * t); }
  double do_density(double t) const override { return rate_ * std::exp(-rate_ * t); }
  double do_hazard(double) const override { return rate_; }
  double do_cumulative_hazard(double t) const override { return rate_ * t; }
  double do_quantile_upper(double p) const override { return -std::log(p) / rate_; }
  double do_quantile_cumulative_hazard(double h) const override { return h / rate_; }

 private:
  double rate_;
};

class Weibull final : public BaselineDistribution {
 public:
  Weibull(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("weibull: shape and scale must be positive");
  }
  std::string_view name() const override { return "weibull"; }

 protected:
  double do_survival(double t) const override { return std::exp(-do_cumulative_hazard(t)); }
  double do_density(double t) const override { return do_hazard(t) * do_survival(t); }
  double do_hazard(double t) const override {
    return shape_ / scale_ * std::pow(t / scale_, shape_ - 1.0);
  }
  double do_cumulative_hazard(double t) const override { return std::pow(t / scale_, shape_); }
  double do_quantile_upper(double p) const override {
    return do_quantile_cumulative_hazard(-std::log(p));
  }
  double do_quantile_cumulative_hazard(double h) const override {
    return scale_ * std::pow(h, 1.0 / shape_);
  }

 private:
  double shape_;
  double scale_;
};

class LogLogistic final : public BaselineDistribution {
 public:
  LogLogistic(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("llogis: shape and scale must be positive");
  }
  std::string_view name() const override { return "llogis"; }

 protected:
  double do_survival(double t) const override { return 1.0 / (1.0 + std::pow(t / scale_, shape_)); }
  double do_density(double t) const override {
    const double z = std::pow(t / scale_, shape_);
    return do_hazard(t) / (1.0 + z);
  }
  double do_hazard(double t) const override {
    const double z = std::pow(t / scale_, shape_);
    return shape_ / scale_ * std::pow(t / scale_, shape_ - 1.0) / (1.0 + z);
  }
  double do_cumulative_hazard(double t) const override {
    return std::log1p(std::pow(t / scale_, shape_));
  }
  double do_quantile_upper(double p) const override {
    return scale_ * std::pow((1.0 - p) / p, 1.0 / shape_);
  }
  double do_quantile_cumulative_hazard(double h) const override {
    return scale_ * std::pow(std::expm1(h), 1.0 / shape_);
  }

 private:
  double shape_;
  double scale_;
};

class LogNormal final : public BaselineDistribution {
 public:
  LogNormal(double meanlog, double sdlog) : meanlog_(meanlog), sdlog_(sdlog) {
    if (!std::isfinite(meanlog) || !(sdlog > 0.0)) throw DomainError("lnorm: require finite meanlog, sdlog > 0");
  }
  std::string_view name() const override { return "lnorm"; }

 protected:
  double z(double t) const { return (std::log(t) - meanlog_) / sdlog_; }
  double do_survival(double t) const override {
    if (t == 0.0) return 1.0;
    return special::normal_upper(z(t));
  }
  double do_density(double t) const override {
    if (t == 0.0) return 0.0;
    return special::normal_pdf(z(t)) / (t * sdlog_);
  }
  double do_quantile_upper(double p) const override {
    return std::exp(meanlog_ - sdlog_ * special::normal_quantile(p));
  }
  double do_quantile_cumulative_hazard(double h) const override {
    // S = exp(-h); near S = 1 work with F = -expm1(-h) to keep digits.
    const double s = std::exp(-h);
    if (s > 0.5) return std::exp(meanlog_ + sdlog_ * special::normal_quantile(-std::expm1(-h)));
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return do_quantile_upper(s);
  }

 private:
  double meanlog_;
  double sdlog_;
};

class Gompertz final : public BaselineDistribution {
 public:
  Gompertz(double shape, double rate) : shape_(shape), rate_(rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gompertz: shape and rate must be positive");
  }
  std::string_view name() const override { return "gompertz"; }

 protected:
  double do_survival(double t) const override { return std::exp(-do_cumulative_hazard(t)); }
  double do_density(double t) const override { return do_hazard(t) * do_survival(t); }
  double do_hazard(double t) const override { return rate_ * std::exp(shape_ * t); }
  double do_cumulative_hazard(double t) const override {
    return rate_ / shape_ * std::expm1(shape_ * t);
  }
  double do_quantile_upper(double p) const override {
    return do_quantile_cumulative_hazard(-std::log(p));
  }
  double do_quantile_cumulative_hazard(double h) const override {
    return std::log1p(shape_ * h / rate_) / shape_;
  }

 private:
  double shape_;
  double rate_;
};

/// Generalized gamma, original (Stacy) parameterization.
class GenGammaOrig final : public BaselineDistribution {
 public:
  GenGammaOrig(double shape, double scale, double k) : shape_(shape), scale_(scale), k_(k) {
    if (!(shape > 0.0) || !(scale > 0.0) || !(k > 0.0))
      throw DomainError("gengamma.orig: shape, scale and k must be positive");
  }
  std::string_view name() const override { return "gengamma.orig"; }

 protected:
  double do_survival(double t) const override {
    return boost::math::gamma_q(k_, std::pow(t / scale_, shape_));
  }
  double do_density(double t) const override {
    if (t == 0.0) return 0.0;
    const double y = std::pow(t / scale_, shape_);
    return boost::math::gamma_p_derivative(k_, y) * shape_ / scale_ * std::pow(t / scale_, shape_ - 1.0);
  }
  double do_quantile_upper(double p) const override {
    return scale_ * std::pow(boost::math::gamma_q_inv(k_, p), 1.0 / shape_);
  }

 private:
  double shape_;
  double scale_;
  double k_;
};

class Uniform final : public BaselineDistribution {
 public:
  Uniform(double min, double max) : min_(min), max_(max) {
    if (!(min >= 0.0) || !(max > min) || !std::isfinite(max))
      throw DomainError("unif: require 0 <= min < max < inf");
  }
  std::string_view name() const override { return "unif"; }

 protected:
  double do_survival(double t) const override {
    if (t <= min_) return 1.0;
    if (t >= max_) return 0.0;
    return (max_ - t) / (max_ - min_);
  }
  double do_density(double t) const override {
    return (t >= min_ && t <= max_) ? 1.0 / (max_ - min_) : 0.0;
  }
  double do_quantile_upper(double p) const override { return max_ - p * (max_ - min_); }

 private:
  double min_;
  double max_;
};

/// Baseline defined only through S0 and its density; quantiles come from
/// `invert_survival`. Lets callers plug in distributions without a
/// closed-form inverse.
class NumericBaseline final : public BaselineDistribution {
 public:
  using Curve = std::function<double(double)>;

  NumericBaseline(std::string name, Curve survival, Curve density)
      : name_(std::move(name)), survival_(std::move(survival)), density_(std::move(density)) {}

  std::string_view name() const override { return name_; }

 protected:
  double do_survival(double t) const override { return survival_(t); }
  double do_density(double t) const override { return density_(t); }
  double do_quantile_upper(double p) const override { return invert_survival(survival_, density_, p); }

 private:
  std::string name_;
  Curve survival_;
  Curve density_;
};

/// Name -> constructor map. Populate at startup, then share as const.
class BaselineRegistry {
 public:
  using Factory = std::function<BaselinePtr(const Params&)>;

  /// Registry holding the built-in distributions.
  static BaselineRegistry with_builtins() {
    BaselineRegistry r;
    r.add("exp", [](const Params& p) {
      detail::ParamReader in("exp", p);
      const double rate = in.positive("rate");
      in.finish();
      return std::make_shared<const Exponential>(rate);
    });
    r.add("weibull", [](const Params& p) {
      detail::ParamReader in("weibull", p);
      const double shape = in.positive("shape");
      const double scale = in.positive("scale");
      in.finish();
      return std::make_shared<const Weibull>(shape, scale);
    });
    r.add("llogis", [](const Params& p) {
      detail::ParamReader in("llogis", p);
      const double shape = in.positive("shape");
      const double scale = in.positive("scale");
      in.finish();
      return std::make_shared<const LogLogistic>(shape, scale);
    });
    r.add("lnorm", [](const Params& p) {
      detail::ParamReader in("lnorm", p);
      const double meanlog = in.finite("meanlog");
      const double sdlog = in.positive("sdlog");
      in.finish();
      return std::make_shared<const LogNormal>(meanlog, sdlog);
    });
    r.add("gompertz", [](const Params& p) {
      detail::ParamReader in("gompertz", p);
      const double shape = in.positive("shape");
      const double rate = in.positive("rate");
      in.finish();
      return std::make_shared<const Gompertz>(shape, rate);
    });
    r.add("gengamma.orig", [](const Params& p) {
      detail::ParamReader in("gengamma.orig", p);
      const double shape = in.positive("shape");
      const double scale = in.positive("scale");
      const double k = in.positive("k");
      in.finish();
      return std::make_shared<const GenGammaOrig>(shape, scale, k);
    });
    r.add("unif", [](const Params& p) {
      detail::ParamReader in("unif", p);
      const double min = in.optional("min", 0.0);
      const double max = in.positive("max");
      in.finish();
      return std::make_shared<const Uniform>(min, max);
    });
    return r;
  }

  void add(std::string name, Factory factory) {
    if (name.empty()) throw DomainError("baseline registry: empty name");
    if (factories_.count(name)) throw DomainError("baseline registry: '" + name + "' is already registered");
    factories_.emplace(std::move(name), std::move(factory));
  }

  bool contains(std::string_view name) const { return factories_.find(name) != factories_.end(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, factory] : factories_) out.push_back(name);
    return out;
  }

  BaselinePtr lookup(std::string_view name, const Params& params = {}) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) {
      std::string known;
      for (const auto& [n, f] : factories_) known += (known.empty() ? "" : ", ") + n;
      throw NotFoundError("unknown baseline distribution '" + std::string(name) + "' (known: " + known + ")");
    }
    return it->second(params);
  }

  BaselinePtr lookup(const BaselineSpec& spec) const { return lookup(spec.name, spec.params); }

 private:
  std::map<std::string, Factory, std::less<>> factories_;
};

/// Process-wide registry with the built-ins.
inline const BaselineRegistry& default_baselines() {
  static const BaselineRegistry registry = BaselineRegistry::with_builtins();
  return registry;
}

}  // namespace survgen
