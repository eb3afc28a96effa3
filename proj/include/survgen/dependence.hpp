#pragma once

// Shared frailties and Archimedean copulas.
//
// Frailties enter the linear predictors on the log scale (w). For the gamma
// and positive stable families z = e^w is the frailty itself:
//   gaussian  w ~ N(0, sigma^2)
//   gamma     z ~ Gamma(1/sigma^2, rate 1/sigma^2)   E z = 1, Var z = sigma^2
//   ps        z ~ PS(alpha), 0 < alpha <= 1          no finite moments
//
// Copulas are sampled by the Marshall–Olkin construction U_j = psi(E_j / M)
// with E_j ~ Exp(1) independent of the mixing variable M.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <algorithm>
#include <vector>

#include "survgen/error.hpp"
#include "survgen/rng.hpp"

namespace survgen {

enum class FrailtyFamily { gamma, gaussian, ps };

inline std::string_view to_string(FrailtyFamily f) {
  switch (f) {
    case FrailtyFamily::gamma: return "gamma";
    case FrailtyFamily::gaussian: return "gaussian";
    case FrailtyFamily::ps: return "ps";
  }
  return "?";
}

inline FrailtyFamily parse_frailty_family(std::string_view name) {
  for (auto f : {FrailtyFamily::gamma, FrailtyFamily::gaussian, FrailtyFamily::ps})
    if (to_string(f) == name) return f;
  throw NotFoundError("unknown frailty distribution '" + std::string(name) + "' (known: gamma, gaussian, ps)");
}

struct FrailtySpec {
  FrailtyFamily family = FrailtyFamily::gamma;
  double sigma = 0.0;  // gamma, gaussian
  double alpha = 0.0;  // ps

  static FrailtySpec gamma(double sigma) { return {FrailtyFamily::gamma, sigma, 0.0}; }
  static FrailtySpec gaussian(double sigma) { return {FrailtyFamily::gaussian, sigma, 0.0}; }
  static FrailtySpec ps(double alpha) { return {FrailtyFamily::ps, 0.0, alpha}; }

  void validate() const {
    switch (family) {
      case FrailtyFamily::gamma:
      case FrailtyFamily::gaussian:
        if (!(sigma > 0.0 && std::isfinite(sigma)))
          throw DomainError(std::string(to_string(family)) + " frailty requires sigma > 0");
        break;
      case FrailtyFamily::ps:
        if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("ps frailty requires 0 < alpha <= 1");
        break;
    }
  }
};

/// One log-scale frailty draw.
inline double draw_frailty(const FrailtySpec& spec, Rng& rng) {
  switch (spec.family) {
    case FrailtyFamily::gaussian: return rng.normal(0.0, spec.sigma);
    case FrailtyFamily::gamma: {
      const double shape = 1.0 / (spec.sigma * spec.sigma);
      return std::log(rng.gamma(shape, shape));
    }
    case FrailtyFamily::ps: return std::log(rng.positive_stable(spec.alpha));
  }
  return 0.0;
}

/// Cluster index (0-based, by first appearance) for every row.
template <class Label>
std::vector<std::size_t> cluster_index(std::span<const Label> labels) {
  std::map<Label, std::size_t> seen;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = seen.emplace(labels[i], seen.size());
    out[i] = it->second;
  }
  return out;
}

/// Shared frailty: one draw per distinct label, in order of first
/// appearance, broadcast to the member rows.
template <class Label>
std::vector<double> rfrailty(std::span<const Label> clusters, const FrailtySpec& spec, Rng& rng) {
  spec.validate();
  if (clusters.empty()) throw DomainError("rfrailty: need at least one row");
  const std::vector<std::size_t> index = cluster_index(clusters);
  std::vector<double> per_cluster;
  std::vector<double> w(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (index[i] == per_cluster.size()) per_cluster.push_back(draw_frailty(spec, rng));
    w[i] = per_cluster[index[i]];
  }
  return w;
}

template <class Label>
std::vector<double> rfrailty(const std::vector<Label>& clusters, const FrailtySpec& spec, Rng& rng) {
  return rfrailty(std::span<const Label>(clusters), spec, rng);
}

/// Archimedean copula sampled through its frailty (mixing) representation.
class ArchimedeanCopula {
 public:
  virtual ~ArchimedeanCopula() = default;
  virtual std::string_view family() const = 0;
  virtual double theta() const = 0;
  virtual double kendall_tau() const = 0;
  /// Mixing variable M (Laplace transform equals the generator inverse psi).
  virtual double sample_mixing(Rng& rng) const = 0;
  /// psi(s), the generator inverse, s >= 0.
  virtual double psi(double s) const = 0;

  /// One d-dimensional draw into `out`. Values are kept inside (0, 1).
  void sample(Rng& rng, std::span<double> out) const {
    const double m = sample_mixing(rng);
    for (double& u : out) {
      const double e = rng.exponential(1.0);
      u = std::clamp(psi(e / m), std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    }
  }
};

class ClaytonCopula final : public ArchimedeanCopula {
 public:
  explicit ClaytonCopula(double theta) : theta_(theta) {
    if (!(theta > 0.0 && std::isfinite(theta))) throw DomainError("clayton copula requires theta > 0");
  }
  std::string_view family() const override { return "clayton"; }
  double theta() const override { return theta_; }
  double kendall_tau() const override { return theta_ / (theta_ + 2.0); }
  double sample_mixing(Rng& rng) const override { return rng.gamma(1.0 / theta_, 1.0); }
  double psi(double s) const override { return std::exp(-std::log1p(s) / theta_); }

 private:
  double theta_;
};

class GumbelCopula final : public ArchimedeanCopula {
 public:
  explicit GumbelCopula(double theta) : theta_(theta) {
    if (!(theta >= 1.0 && std::isfinite(theta))) throw DomainError("gumbel copula requires theta >= 1");
  }
  std::string_view family() const override { return "gumbel"; }
  double theta() const override { return theta_; }
  double kendall_tau() const override { return 1.0 - 1.0 / theta_; }
  double sample_mixing(Rng& rng) const override { return rng.positive_stable(1.0 / theta_); }
  double psi(double s) const override { return std::exp(-std::pow(s, 1.0 / theta_)); }

 private:
  double theta_;
};

struct CopulaSpec {
  std::string family;
  double theta = 1.0;
  std::size_t dim = 2;
};

using CopulaPtr = std::shared_ptr<const ArchimedeanCopula>;

/// Family name -> copula constructor. Built-ins: clayton, gumbel.
class CopulaRegistry {
 public:
  using Factory = std::function<CopulaPtr(double theta)>;
  using TauInverse = std::function<double(double tau)>;

  static CopulaRegistry with_builtins() {
    CopulaRegistry r;
    r.add(
        "clayton", [](double theta) { return std::make_shared<const ClaytonCopula>(theta); },
        [](double tau) {
          if (!(tau > 0.0 && tau < 1.0)) throw DomainError("clayton: tau must lie in (0, 1)");
          return 2.0 * tau / (1.0 - tau);
        });
    r.add(
        "gumbel", [](double theta) { return std::make_shared<const GumbelCopula>(theta); },
        [](double tau) {
          if (!(tau >= 0.0 && tau < 1.0)) throw DomainError("gumbel: tau must lie in [0, 1)");
          return 1.0 / (1.0 - tau);
        });
    return r;
  }

  void add(std::string name, Factory factory, TauInverse itau) {
    if (entries_.count(name)) throw DomainError("copula registry: '" + name + "' is already registered");
    entries_.emplace(std::move(name), Entry{std::move(factory), std::move(itau)});
  }

  bool contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

  CopulaPtr make(std::string_view family, double theta) const { return entry(family).factory(theta); }

  double itau(std::string_view family, double tau) const { return entry(family).itau(tau); }

 private:
  struct Entry {
    Factory factory;
    TauInverse itau;
  };

  const Entry& entry(std::string_view family) const {
    const auto it = entries_.find(family);
    if (it == entries_.end())
      throw NotFoundError("unknown copula family '" + std::string(family) + "' (known: clayton, gumbel)");
    return it->second;
  }

  std::map<std::string, Entry, std::less<>> entries_;
};

inline const CopulaRegistry& default_copulas() {
  static const CopulaRegistry registry = CopulaRegistry::with_builtins();
  return registry;
}

/// Copula parameter with the given Kendall's tau.
inline double itau(std::string_view family, double tau) { return default_copulas().itau(family, tau); }

/// n x dim matrix of copula uniforms, row-major.
class UniformMatrix {
 public:
  UniformMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

inline CopulaPtr make_copula(const CopulaSpec& spec) {
  if (spec.dim < 2) throw DomainError("copula dimension must be at least 2");
  return default_copulas().make(spec.family, spec.theta);
}

/// n i.i.d. draws from the copula, consuming `rng` sequentially.
inline UniformMatrix rcopula(const CopulaSpec& spec, std::size_t n, Rng& rng) {
  const CopulaPtr copula = make_copula(spec);
  UniformMatrix out(n, spec.dim);
  for (std::size_t i = 0; i < n; ++i) copula->sample(rng, out.row(i));
  return out;
}

}  // namespace survgen
