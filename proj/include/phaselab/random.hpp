#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

namespace phaselab {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Order-sensitive 64-bit combination of words. The result depends only on
/// the values passed, never on the platform or thread that computes it.
constexpr std::uint64_t hash_combine(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

inline std::uint64_t bits_of(double v) noexcept {
  if (v == 0.0) v = 0.0;  // fold -0.0 into +0.0
  return std::bit_cast<std::uint64_t>(v);
}

/// Derive an independent child seed for a numbered sub-stream.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) noexcept {
  return hash_combine({seed, stream});
}

/// Random source used everywhere in the library.
///
/// The engine is mt19937_64, whose output sequence is fixed by the standard.
/// All distribution transforms are implemented here rather than taken from
/// <random>, whose distributions are implementation-defined; this keeps every
/// draw bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// (X + iY)/sqrt(2) with X, Y independent standard normals.
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
      return gamma(shape + 1.0) * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Student-t with `dof` degrees of freedom: Z / sqrt(V / dof), V ~ chi^2(dof).
  double student_t(double dof) {
    const double z = normal();
    const double v = 2.0 * gamma(0.5 * dof);
    return z / std::sqrt(v / dof);
  }

  /// Poisson(rate). Inversion below rate 30, PTRS transformed rejection above.
  std::int64_t poisson(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw std::invalid_argument("poisson rate must be finite and nonnegative");
    }
    if (rate == 0.0) return 0;
    if (rate < 30.0) return poisson_inversion(rate);
    return poisson_ptrs(rate);
  }

 private:
  std::int64_t poisson_inversion(double rate) {
    const double p0 = std::exp(-rate);
    // Rounding can leave the accumulated CDF just short of 1; the cap
    // restarts the draw instead of looping forever.
    const auto cap = static_cast<std::int64_t>(rate + 40.0 * std::sqrt(rate) + 60.0);
    for (;;) {
      const double u = uniform();
      double p = p0;
      double cdf = p0;
      std::int64_t k = 0;
      while (u > cdf && k < cap) {
        ++k;
        p *= rate / static_cast<double>(k);
        cdf += p;
      }
      if (k < cap) return k;
    }
  }

  // Hormann (1993), "The transformed rejection method for generating
  // Poisson random variables".
  std::int64_t poisson_ptrs(double rate) {
    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -rate + kf * loglam - std::lgamma(kf + 1.0)) {
        return static_cast<std::int64_t>(kf);
      }
    }
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace phaselab
