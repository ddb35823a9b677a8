#include <cmath>
#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "swarmsim/rng.hpp"
#include "swarmsim/sensing.hpp"

using namespace swarmsim;

TEST_CASE("high pass recurrence matches hand computation") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const auto y = high_pass(x, 0.20, 0.60, -0.60);
  REQUIRE(y.size() == 3);
  REQUIRE(y[0] == 0.0);
  REQUIRE_THAT(y[1], Catch::Matchers::WithinAbs(0.6, 1e-12));
  REQUIRE_THAT(y[2], Catch::Matchers::WithinAbs(0.72, 1e-12));
  REQUIRE_THROWS_AS(high_pass(std::vector<double>{}, 0.2, 0.6, -0.6), std::invalid_argument);
}

TEST_CASE("high pass kills constant input") {
  const std::vector<double> x(200, 5.0);
  const auto y = high_pass(x, 0.20, 0.60, -0.60);
  for (double v : y) REQUIRE(v == 0.0);
}

TEST_CASE("rms of a known pair") {
  const std::vector<double> xs = {3.0, 4.0};
  REQUIRE_THAT(rms(xs), Catch::Matchers::WithinAbs(std::sqrt(12.5), 1e-12));
  REQUIRE_THROWS_AS(rms(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("classification is a strict threshold") {
  REQUIRE(classify(1.551, 1.55) == 1);
  REQUIRE(classify(1.55, 1.55) == 0);
  REQUIRE(classify(0.0, 1.55) == 0);
}

TEST_CASE("statistical error rates sit at their analytic values") {
  // P(nonvib RMS > 1.55) and P(vib RMS <= 1.55) from the shifted gamma
  // amplitude models, reference values computed with the regularized
  // incomplete gamma function.
  SensorConfig cfg;
  Rng rng(2024);
  const int n = 400000;
  int fp = 0, fn = 0;
  for (int i = 0; i < n; ++i) {
    fp += classify(draw_rms(0, cfg, rng), cfg.rms_threshold);
    fn += 1 - classify(draw_rms(1, cfg, rng), cfg.rms_threshold);
  }
  const double fp_rate = static_cast<double>(fp) / n;
  const double fn_rate = static_cast<double>(fn) / n;
  REQUIRE_THAT(fp_rate, Catch::Matchers::WithinAbs(0.085277, 0.003));
  REQUIRE_THAT(fn_rate, Catch::Matchers::WithinAbs(0.212561, 0.004));
  REQUIRE_THAT(0.5 * (fp_rate + fn_rate), Catch::Matchers::WithinAbs(0.148919, 0.003));
}

TEST_CASE("rms draws respect the class means") {
  SensorConfig cfg;
  Rng rng(99);
  const int n = 200000;
  double vib = 0.0, nonvib = 0.0;
  for (int i = 0; i < n; ++i) {
    vib += draw_rms(1, cfg, rng);
    nonvib += draw_rms(0, cfg, rng);
  }
  REQUIRE_THAT(vib / n, Catch::Matchers::WithinAbs(cfg.vib_rms.mean(), 0.01));
  REQUIRE_THAT(nonvib / n, Catch::Matchers::WithinAbs(cfg.nonvib_rms.mean(), 0.01));
}

TEST_CASE("rms draws clamp at zero") {
  SensorConfig cfg;
  cfg.vib_rms = {1.0, 0.1, -10.0};
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) REQUIRE(draw_rms(1, cfg, rng) == 0.0);
}

TEST_CASE("observation duration covers stabilization and sensing") {
  SensorConfig cfg;
  Rng rng(3);
  const Observation o = get_observation(1, cfg, rng);
  REQUIRE(o.duration_ms == 1000.0);
  REQUIRE((o.bit == 0 || o.bit == 1));
  REQUIRE(o.e_hat >= 0.0);
}

TEST_CASE("observations are reproducible under the same stream") {
  SensorConfig cfg;
  Rng a(55), b(55);
  for (int i = 0; i < 50; ++i) {
    const Observation oa = get_observation(i % 2, cfg, a);
    const Observation ob = get_observation(i % 2, cfg, b);
    REQUIRE(oa.bit == ob.bit);
    REQUIRE(oa.e_hat == ob.e_hat);
  }
}

TEST_CASE("signal pipeline separates the classes cleanly without noise") {
  SensorConfig cfg;
  cfg.mode = SensorMode::SignalPipeline;
  cfg.noise_sigma = 0.0;
  Rng rng(11);
  // Pure tone through the filter: amplitude near gain * 3.75 / sqrt(2).
  for (int i = 0; i < 20; ++i) {
    const Observation vib = get_observation(1, cfg, rng);
    REQUIRE(vib.bit == 1);
    REQUIRE_THAT(vib.e_hat, Catch::Matchers::WithinAbs(2.49, 0.15));
    const Observation quiet = get_observation(0, cfg, rng);
    REQUIRE(quiet.bit == 0);
    REQUIRE(quiet.e_hat == 0.0);
  }
}

TEST_CASE("signal pipeline with noise still favours the right class") {
  SensorConfig cfg;
  cfg.mode = SensorMode::SignalPipeline;
  Rng rng(13);
  const int n = 2000;
  int vib_hits = 0, quiet_false = 0;
  for (int i = 0; i < n; ++i) {
    vib_hits += get_observation(1, cfg, rng).bit;
    quiet_false += get_observation(0, cfg, rng).bit;
  }
  REQUIRE(static_cast<double>(vib_hits) / n > 0.9);
  REQUIRE(static_cast<double>(quiet_false) / n < 0.1);
}

TEST_CASE("gamma spec mean helper") {
  const GammaSpec speed{3.1, 0.095, 0.8};
  REQUIRE_THAT(speed.mean(), Catch::Matchers::WithinAbs(1.0945, 1e-12));
}
