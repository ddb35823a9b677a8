#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "swarmsim/rng.hpp"

using namespace swarmsim;

TEST_CASE("mix64 is deterministic and spreads nearby inputs") {
  REQUIRE(mix64(0) == mix64(0));
  REQUIRE(mix64(1) != mix64(2));
  std::set<std::uint64_t> outs;
  for (std::uint64_t i = 0; i < 1000; ++i) outs.insert(mix64(i));
  REQUIRE(outs.size() == 1000);
}

TEST_CASE("derive_seed decouples tags") {
  const std::uint64_t master = 42;
  REQUIRE(derive_seed(master, 1) == derive_seed(master, 1, 0));
  REQUIRE(derive_seed(master, 1) != derive_seed(master, 2));
  REQUIRE(derive_seed(master, 1, 5) != derive_seed(master, 1, 6));
  REQUIRE(derive_seed(master, 1, 5) != derive_seed(master, 2, 5));
  REQUIRE(derive_seed(1, 3, 5) != derive_seed(2, 3, 5));
  REQUIRE(derive_seed(master, Stream::Walk, 7) ==
          derive_seed(master, static_cast<std::uint64_t>(Stream::Walk), 7));

  std::set<std::uint64_t> outs;
  for (std::uint64_t a = 0; a < 32; ++a)
    for (std::uint64_t b = 0; b < 32; ++b) outs.insert(derive_seed(master, a, b));
  REQUIRE(outs.size() == 32 * 32);
}

TEST_CASE("same seed reproduces the same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  Rng c(124);
  bool any_diff = false;
  Rng a2(123);
  for (int i = 0; i < 10; ++i) any_diff = any_diff || (a2.next_u64() != c.next_u64());
  REQUIRE(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) with the right moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.5, 0.005));
  REQUIRE_THAT(var, Catch::Matchers::WithinAbs(1.0 / 12.0, 0.005));
}

TEST_CASE("uniform maps to the requested interval") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-3.0, 5.0);
    REQUIRE(x >= -3.0);
    REQUIRE(x < 5.0);
  }
}

TEST_CASE("bernoulli endpoints are exact") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) REQUIRE_FALSE(rng.bernoulli(0.0));
  for (int i = 0; i < 1000; ++i) REQUIRE(rng.bernoulli(1.0));
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
  REQUIRE_THAT(static_cast<double>(hits) / n, Catch::Matchers::WithinAbs(0.3, 0.01));
}

TEST_CASE("normal has standard moments") {
  Rng rng(13);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(var, Catch::Matchers::WithinAbs(1.0, 0.02));
  REQUIRE_THAT(rng.normal(10.0, 2.0), Catch::Matchers::WithinAbs(10.0, 20.0));
}

TEST_CASE("gamma matches its analytic moments") {
  Rng rng(17);
  const double shape = 3.1, scale = 0.095;
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gamma(shape, scale);
    REQUIRE(x >= 0.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(shape * scale, 0.003));
  REQUIRE_THAT(var, Catch::Matchers::WithinAbs(shape * scale * scale, 0.002));
}

TEST_CASE("gamma shape below one uses the boost and stays positive") {
  Rng rng(19);
  const double shape = 0.5, scale = 2.0;
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gamma(shape, scale);
    REQUIRE(x >= 0.0);
    sum += x;
  }
  REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(shape * scale, 0.03));
}

TEST_CASE("gamma edge cases") {
  Rng rng(21);
  REQUIRE(rng.gamma(2.0, 0.0) == 0.0);
  REQUIRE_THROWS_AS(rng.gamma(0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(rng.gamma(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("cauchy median sits at the location parameter") {
  Rng rng(23);
  const int n = 100001;
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.cauchy(7860.0, 10725.0);
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  REQUIRE_THAT(xs[n / 2], Catch::Matchers::WithinAbs(7860.0, 500.0));
  REQUIRE(rng.cauchy(5.0, 0.0) == 5.0);
}

TEST_CASE("separate streams do not interact") {
  const std::uint64_t master = 99;
  Rng walk1(derive_seed(master, Stream::Walk, 1));
  std::vector<std::uint64_t> ref;
  for (int i = 0; i < 10; ++i) ref.push_back(walk1.next_u64());

  Rng walk2(derive_seed(master, Stream::Walk, 1));
  Rng sense(derive_seed(master, Stream::Sense, 1));
  for (int i = 0; i < 10; ++i) {
    sense.next_u64();
    sense.next_u64();
    REQUIRE(walk2.next_u64() == ref[static_cast<std::size_t>(i)]);
  }
}
