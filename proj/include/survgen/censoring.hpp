#pragma once

// From latent failure times to observed records.
//
// Right censoring: time = min(t, c_1, ..., c_k), status = 1 iff t is strictly
// smaller than every censoring time (a tie counts as censored).
//
// Interval censoring produces (L, R] with L < T <= R and R possibly +inf:
//   type I   current status at one inspection time tau: (0, tau] or (tau, inf]
//   type II  scheduled visits v_0 < ... < v_m, each v_k (k >= 1) attended
//            independently with probability `prob`; v_0 is the time origin
//            and always counts as attended.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survgen/error.hpp"
#include "survgen/rng.hpp"

namespace survgen {

struct ObservedRecord {
  double time = 0.0;
  int status = 0;
};

struct IntervalRecord {
  double left = 0.0;
  double right = std::numeric_limits<double>::infinity();
};

/// time = min of every event and censoring time; cause = 1-based index of
/// the event that attains it strictly before all censoring times, else 0.
struct CompetingRecord {
  double time = 0.0;
  std::size_t cause = 0;
};

inline CompetingRecord competing_censor(std::span<const double> events, std::span<const double> censors) {
  if (events.empty()) throw DomainError("competing_censor: need at least one event time");
  double censor_min = std::numeric_limits<double>::infinity();
  for (double c : censors) {
    if (!(c > 0.0)) throw DomainError("censoring times must be positive");
    censor_min = std::min(censor_min, c);
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (!(events[k] > 0.0)) throw DomainError("failure times must be positive");
    if (events[k] < events[best]) best = k;
  }
  const double t = events[best];
  if (std::isinf(t) && std::isinf(censor_min))
    throw DomainError("an infinite (cured) failure time needs a finite censoring time");
  if (t < censor_min) return {t, best + 1};
  return {censor_min, 0};
}

inline ObservedRecord right_censor(double t, std::span<const double> censors) {
  const double events[] = {t};
  const CompetingRecord r = competing_censor(events, censors);
  return {r.time, r.cause == 1 ? 1 : 0};
}

inline ObservedRecord right_censor(double t, double censor) {
  const double censors[] = {censor};
  return right_censor(t, censors);
}

inline IntervalRecord rinterval_type1(double t, double tau) {
  if (!(t > 0.0) || !(tau > 0.0) || !std::isfinite(tau))
    throw DomainError("rinterval_type1: t and tau must be positive (tau finite)");
  if (t <= tau) return {0.0, tau};
  return {tau, std::numeric_limits<double>::infinity()};
}

inline void validate_visit_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("visit grid must not be empty");
  if (!(grid.front() >= 0.0)) throw DomainError("visit grid must start at a time >= 0");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw DomainError("visit times must be finite");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw DomainError("visit grid must be strictly ascending");
  }
}

/// from, from + by, ... up to `to` (inclusive within rounding).
inline std::vector<double> visit_grid(double from, double to, double by) {
  if (!(by > 0.0) || !(to >= from)) throw DomainError("visit_grid: require by > 0 and to >= from");
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::floor((to - from) / by + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) out.push_back(from + static_cast<double>(k) * by);
  return out;
}

/// Type II interval censoring. Consumes exactly grid.size() - 1 uniforms.
inline IntervalRecord rinterval_type2(double t, std::span<const double> grid, double prob, Rng& rng) {
  if (!(t > 0.0)) throw DomainError("rinterval_type2: t must be positive");
  if (!(prob > 0.0 && prob <= 1.0)) throw DomainError("rinterval_type2: prob must lie in (0, 1]");
  validate_visit_grid(grid);
  IntervalRecord r{0.0, std::numeric_limits<double>::infinity()};
  if (grid.front() < t) r.left = grid.front();
  bool right_found = grid.front() >= t;
  if (right_found) r.right = grid.front();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const bool attended = rng.uniform() < prob;
    if (!attended || right_found) continue;
    if (grid[k] < t) {
      r.left = grid[k];
    } else {
      r.right = grid[k];
      right_found = true;
    }
  }
  return r;
}

}  // namespace survgen
