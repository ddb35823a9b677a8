#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmsim/rng.hpp"

namespace swarmsim {

struct GammaSpec {
  double shape = 1.0;
  double scale = 1.0;
  double shift = 0.0;

  double mean() const { return shape * scale + shift; }
};

enum class SensorMode { Statistical, SignalPipeline };

struct SensorConfig {
  SensorMode mode = SensorMode::Statistical;
  double rms_threshold = 1.55;
  // High-pass recurrence coefficients: y[i] = a1*y[i-1] + a2*x[i] + a3*x[i-1].
  double filter_a1 = 0.20;
  double filter_a2 = 0.60;
  double filter_a3 = -0.60;
  double sample_rate_hz = 350.0;
  double stabilize_ms = 500.0;
  double sense_window_ms = 500.0;
  // Statistical mode: filtered-RMS amplitude drawn per class.
  GammaSpec vib_rms{5.33, 0.51, -0.20};
  GammaSpec nonvib_rms{2.52, 0.29, 0.14};
  // Signal-pipeline mode: synthesized raw accelerometer magnitudes.
  double vib_freq_hz = 120.0;
  double vib_amplitude = 3.75;
  double noise_sigma = 0.80;

  double observation_ms() const { return stabilize_ms + sense_window_ms; }
};

// y[0] = 0 and x[0] is the first raw sample, so a constant input dies out
// while oscillation passes.
inline std::vector<double> high_pass(std::span<const double> raw, double a1, double a2, double a3) {
  if (raw.empty()) throw std::invalid_argument("high_pass: empty input");
  std::vector<double> out(raw.size());
  out[0] = 0.0;
  for (std::size_t i = 1; i < raw.size(); ++i)
    out[i] = a1 * out[i - 1] + a2 * raw[i] + a3 * raw[i - 1];
  return out;
}

inline double rms(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("rms: empty input");
  double acc = 0.0;
  for (double x : xs) acc += x * x;
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

inline int classify(double e_hat, double threshold) { return e_hat > threshold ? 1 : 0; }

// Statistical mode: one filtered-RMS draw for the given tile class, clamped
// non-negative.
inline double draw_rms(int tile_bit, const SensorConfig& cfg, Rng& rng) {
  const GammaSpec& spec = tile_bit ? cfg.vib_rms : cfg.nonvib_rms;
  return std::max(0.0, rng.gamma(spec.shape, spec.scale) + spec.shift);
}

struct Observation {
  int bit = 0;
  double e_hat = 0.0;
  double duration_ms = 0.0;
};

namespace detail {

inline double pipeline_rms(int tile_bit, const SensorConfig& cfg, Rng& rng) {
  const int n = std::max(2, static_cast<int>(std::lround(
                                cfg.sample_rate_hz * cfg.sense_window_ms / 1000.0)));
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  std::vector<double> raw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.sample_rate_hz;
    double a = cfg.noise_sigma > 0.0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0;
    if (tile_bit) a += cfg.vib_amplitude * std::sin(2.0 * kPi * cfg.vib_freq_hz * t + phase);
    raw[static_cast<std::size_t>(i)] = a;
  }
  return rms(high_pass(raw, cfg.filter_a1, cfg.filter_a2, cfg.filter_a3));
}

}  // namespace detail

// One full observation: stabilization plus sensing window; the robot is
// expected to stay put for duration_ms.
inline Observation get_observation(int tile_bit, const SensorConfig& cfg, Rng& rng) {
  const double e = cfg.mode == SensorMode::Statistical ? draw_rms(tile_bit, cfg, rng)
                                                       : detail::pipeline_rms(tile_bit, cfg, rng);
  return Observation{classify(e, cfg.rms_threshold), e, cfg.observation_ms()};
}

}  // namespace swarmsim
