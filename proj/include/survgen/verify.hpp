#pragma once

// Diagnostics: Kolmogorov–Smirnov distance against an analytic survival
// function, Kendall's tau, and the Kaplan–Meier estimator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <span>
#include <vector>

#include "survgen/error.hpp"

namespace survgen {

/// sup_t |S_n(t) - S(t)| over the sample, with S_n the empirical survival
/// function. Both one-sided gaps at every jump are checked. Infinite sample
/// values (cured subjects) sit at +inf where S = 0 unless S says otherwise.
inline double ks_distance(std::span<const double> sample, const std::function<double(double)>& survival) {
  if (sample.empty()) throw DomainError("ks_distance: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = survival(x[i]);
    // Just before x[i] the empirical survival is 1 - i/n, at x[i] it is 1 - (i+1)/n.
    const double before = 1.0 - static_cast<double>(i) / n;
    const double after = 1.0 - static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(before - s), std::abs(after - s)});
  }
  return d;
}

/// KS distance of a sample of (0,1) values against U(0,1).
inline double ks_uniform(std::span<const double> u) {
  return ks_distance(u, [](double v) { return 1.0 - std::clamp(v, 0.0, 1.0); });
}

/// Asymptotic Kolmogorov critical value c_alpha / sqrt(n).
inline double ks_critical(std::size_t n, double level = 0.99) {
  if (n == 0) throw DomainError("ks_critical: n must be positive");
  double c;
  if (level == 0.95) c = 1.358;
  else if (level == 0.99) c = 1.628;
  else if (level == 0.999) c = 1.949;
  else throw DomainError("ks_critical: level must be 0.95, 0.99 or 0.999");
  return c / std::sqrt(static_cast<double>(n));
}

/// Kendall's tau-a, (concordant - discordant) / C(n, 2). Tied pairs count as
/// discordant; a warning goes to `warn` when any are found.
inline double kendall_tau(std::span<const double> x, std::span<const double> y, std::ostream* warn = &std::clog) {
  if (x.size() != y.size()) throw DomainError("kendall_tau: x and y differ in length");
  if (x.size() < 2) throw DomainError("kendall_tau: need at least two observations");
  const std::size_t n = x.size();
  long long score = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (x[i] - x[j]) * (y[i] - y[j]);
      // Products of two infinite differences are still signed correctly;
      // inf - inf gives NaN, which we treat as a tie.
      if (p > 0.0) {
        ++score;
      } else {
        --score;
        if (!(p < 0.0)) ++ties;
      }
    }
  }
  if (ties > 0 && warn) *warn << "kendall_tau: " << ties << " tied pair(s) counted as discordant\n";
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(score) / pairs;
}

/// Right-continuous step function: values[0] on [0, knots[0]), values[k] on
/// [knots[k-1], knots[k]), values.back() from the last knot on.
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values{1.0};

  double operator()(double t) const {
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    return values[static_cast<std::size_t>(it - knots.begin())];
  }
};

/// Product-limit estimate over the distinct event times.
inline StepFunction kaplan_meier(std::span<const double> time, std::span<const int> status) {
  if (time.size() != status.size()) throw DomainError("kaplan_meier: time and status differ in length");
  std::map<double, std::pair<std::size_t, std::size_t>> at;  // time -> (events, removed)
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (!(time[i] > 0.0)) throw DomainError("kaplan_meier: times must be positive");
    if (status[i] != 0 && status[i] != 1) throw DomainError("kaplan_meier: status must be 0 or 1");
    auto& cell = at[time[i]];
    cell.first += static_cast<std::size_t>(status[i]);
    cell.second += 1;
  }
  StepFunction km;
  std::size_t at_risk = time.size();
  double s = 1.0;
  for (const auto& [t, cell] : at) {
    if (cell.first > 0) {
      s *= 1.0 - static_cast<double>(cell.first) / static_cast<double>(at_risk);
      km.knots.push_back(t);
      km.values.push_back(s);
    }
    at_risk -= cell.second;
  }
  return km;
}

}  // namespace survgen
