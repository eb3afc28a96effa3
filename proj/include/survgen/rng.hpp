#pragma once

// Deterministic random source.
//
// Generator: xoshiro256** (Blackman & Vigna, 2018), state seeded by four
// consecutive SplitMix64 outputs. The SplitMix64 starting value for a
// (seed, stream_id) pair is
//
//     mix64(seed + 0x9E3779B97F4A7C15 * (mix64(stream_id) | 1))
//
// where mix64 is the SplitMix64 finalizer. Every variate below is built from
// 64-bit integer outputs with portable arithmetic, so a given pair yields the
// same sequence on every platform with IEEE-754 doubles.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "survgen/error.hpp"
#include "survgen/special.hpp"

namespace survgen {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = detail::mix64(seed + detail::kGolden * (detail::mix64(stream_id) | 1u));
    for (auto& word : state_) {
      sm += detail::kGolden;
      word = detail::mix64(sm);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent stream sharing this stream's seed.
  Rng substream(std::uint64_t stream_id) const noexcept { return Rng(seed_, stream_id); }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1): midpoints of a 2^52 grid, so the
  /// extreme values are 2^-53 and 1 - 2^-53.
  double uniform() noexcept {
    constexpr double scale = 0x1.0p-52;
    return (static_cast<double>(next_u64() >> 12) + 0.5) * scale;
  }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw DomainError("uniform: require lo < hi");
    return lo + (hi - lo) * uniform();
  }

  /// Inverse-CDF normal: mean + sd * Phi^{-1}(U). One uniform per draw.
  double normal(double mean = 0.0, double sd = 1.0) {
    if (!(sd >= 0.0)) throw DomainError("normal: sd must be non-negative");
    const double z = special::normal_quantile(uniform());
    if (sd == 0.0) return mean;
    return mean + sd * z;
  }

  double exponential(double rate = 1.0) {
    if (!(rate > 0.0)) throw DomainError("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
  }

  /// Gamma(shape, rate), mean shape / rate. Marsaglia–Tsang squeeze for
  /// shape >= 1; shape < 1 uses the boost Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape, double rate = 1.0) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma: shape and rate must be positive");
    return standard_gamma(shape) / rate;
  }

  /// Positive stable variate with Laplace transform exp(-s^alpha), 0 < alpha <= 1.
  /// Chambers–Mallows–Stuck (Kanter) construction from U' ~ U(0, pi) and E ~ Exp(1).
  double positive_stable(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("positive_stable: alpha must lie in (0, 1]");
    const double angle = std::numbers::pi * uniform();
    const double e = exponential(1.0);
    if (alpha == 1.0) return 1.0;
    const double left = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha);
    const double right = std::pow(std::sin((1.0 - alpha) * angle) / e, (1.0 - alpha) / alpha);
    return left * right;
  }

  bool bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli: p must lie in [0, 1]");
    return uniform() < p;
  }

 private:
  double standard_gamma(double shape) {
    if (shape < 1.0) {
      const double g = standard_gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = special::normal_quantile(uniform());
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

}  // namespace survgen
