#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fubif/threshold.hpp"

using namespace fubif;

TEST_CASE("fit_threshold_model") {
  const std::vector<double> flat{5, 5, 5};
  const auto u = fit_threshold_model(flat, ThresholdKind::kUniform, 1.0);
  CHECK(u.lo == 5.0);
  CHECK(u.hi == 5.0);
  CHECK(u.degenerate());

  const std::vector<double> two{0, 10};
  const auto u2 = fit_threshold_model(two, ThresholdKind::kUniform, 1.0);
  CHECK(u2.lo == 0.0);
  CHECK(u2.hi == 10.0);
  CHECK_FALSE(u2.degenerate());

  const std::vector<double> pm{-1, 1};
  const auto n = fit_threshold_model(pm, ThresholdKind::kNormal, 2.0);
  CHECK(n.mean == 0.0);
  CHECK(n.sigma == 2.0);  // population std of {-1, 1} is 1, scaled by eta

  CHECK_THROWS_AS(fit_threshold_model({}, ThresholdKind::kUniform, 1.0), DataError);
}

TEST_CASE("sample_threshold statistics") {
  Rng rng(21);
  ThresholdModel point;
  point.kind = ThresholdKind::kUniform;
  point.lo = point.hi = 5.0;
  for (int i = 0; i < 100; ++i) CHECK(sample_threshold(point, rng) == 5.0);

  ThresholdModel u;
  u.kind = ThresholdKind::kUniform;
  u.lo = 0.0;
  u.hi = 10.0;
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const double t = sample_threshold(u, rng);
    REQUIRE(t >= 0.0);
    REQUIRE(t <= 10.0);
    sum += t;
  }
  CHECK(std::abs(sum / draws - 5.0) < 0.1);

  ThresholdModel n;
  n.kind = ThresholdKind::kNormal;
  n.mean = 0.0;
  n.sigma = 2.0;
  double ss = 0.0;
  int below = 0;
  for (int i = 0; i < draws; ++i) {
    const double t = sample_threshold(n, rng);
    ss += t * t;
    if (t < 0.0) ++below;
  }
  CHECK(std::abs(std::sqrt(ss / draws) - 2.0) < 0.1);  // 5% of sigma = 2
  CHECK(std::abs(below / static_cast<double>(draws) - 0.5) < 0.01);
}

TEST_CASE("threshold_cdf") {
  ThresholdModel u;
  u.kind = ThresholdKind::kUniform;
  u.lo = 0.0;
  u.hi = 10.0;
  CHECK(threshold_cdf(u, 5.0) == 0.5);
  CHECK(threshold_cdf(u, -3.0) == 0.0);
  CHECK(threshold_cdf(u, 12.0) == 1.0);

  ThresholdModel n;
  n.kind = ThresholdKind::kNormal;
  n.mean = 0.0;
  n.sigma = 1.0;
  CHECK(threshold_cdf(n, 0.0) == 0.5);
  // Standard normal quantile spot checks, 1e-7 accuracy.
  CHECK(std::abs(threshold_cdf(n, 1.0) - 0.841344746068543) < 1e-7);
  CHECK(std::abs(threshold_cdf(n, -1.959963984540054) - 0.025) < 1e-7);

  SECTION("nondecreasing with correct tails") {
    Rng rng(9);
    for (const auto& m : {u, n}) {
      CHECK(threshold_cdf(m, -1e12) == 0.0);
      CHECK(threshold_cdf(m, 1e12) == 1.0);
      for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-20.0, 20.0);
        const double b = rng.uniform(-20.0, 20.0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(threshold_cdf(m, lo) <= threshold_cdf(m, hi));
      }
    }
  }

  SECTION("degenerate models are a step with 0.5 at the atom") {
    ThresholdModel flat;
    flat.kind = ThresholdKind::kUniform;
    flat.lo = flat.hi = 5.0;
    CHECK(threshold_cdf(flat, 4.999) == 0.0);
    CHECK(threshold_cdf(flat, 5.0) == 0.5);
    CHECK(threshold_cdf(flat, 5.001) == 1.0);

    ThresholdModel spike;
    spike.kind = ThresholdKind::kNormal;
    spike.mean = -2.0;
    spike.sigma = 0.0;
    CHECK(threshold_cdf(spike, -3.0) == 0.0);
    CHECK(threshold_cdf(spike, -2.0) == 0.5);
    CHECK(threshold_cdf(spike, 0.0) == 1.0);
    CHECK(threshold_cdf(spike, -1e12) == 0.0);
    CHECK(threshold_cdf(spike, 1e12) == 1.0);
  }
}

TEST_CASE("threshold kind names") {
  CHECK(parse_threshold_kind("uniform") == ThresholdKind::kUniform);
  CHECK(parse_threshold_kind("normal") == ThresholdKind::kNormal);
  CHECK_THROWS_AS(parse_threshold_kind("weird"), ConfigError);
}
