#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace swarmsim {

inline constexpr double kPi = std::numbers::pi;

// SplitMix64 finalizer, used to spread seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and up to two tags.
// Streams derived with distinct tags stay decoupled, so adding draws to one
// subsystem never perturbs another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(master ^ mix64(a + 0x632BE59BD9B4E019ULL)) ^ mix64(b + 0xD6E8FEB86659FD93ULL));
}

// Stream tags, one per subsystem that consumes randomness.
enum class Stream : std::uint64_t {
  GridGen = 1,
  Placement = 2,
  Walk = 3,
  Turn = 4,
  Sense = 5,
  Message = 6,
  NetworkLoss = 7,
  Actuation = 8,
  Replicate = 9,
  Optimizer = 10,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream s, std::uint64_t b = 0) {
  return derive_seed(master, static_cast<std::uint64_t>(s), b);
}

// Deterministic random stream. Samplers transform the raw engine output
// directly instead of going through std:: distributions, whose sequences vary
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller, no cached second value.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Marsaglia-Tsang. shape < 1 handled with the power boost; scale == 0
  // degenerates to 0 exactly.
  double gamma(double shape, double scale) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
    if (scale == 0.0) return 0.0;
    if (shape < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // scale == 0 degenerates to the location point mass.
  double cauchy(double location, double scale) {
    return location + scale * std::tan(kPi * (uniform01() - 0.5));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace swarmsim
