#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "fubif/splitting.hpp"
#include "oracles.hpp"

using namespace fubif;

namespace {

Matrix points_from(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.begin()->size();
  Matrix m(n, d);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

SplitFamilyDescriptor descriptor(SplitFamily f) {
  SplitFamilyDescriptor d;
  d.family = f;
  return d;
}

constexpr SplitFamily kAllFamilies[] = {
    SplitFamily::kIf,   SplitFamily::kEif,  SplitFamily::kHif,
    SplitFamily::kEllipse, SplitFamily::kHyper, SplitFamily::kPara,
    SplitFamily::kQuad, SplitFamily::kNn,   SplitFamily::kSine};

// Random node context: points uniform in [-2, 3]^d.
Matrix random_points(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (auto& v : m.values()) v = rng.uniform(-2.0, 3.0);
  return m;
}

double min_focus_distance(const SplitParams& params, std::span<const double> x) {
  double best = 1e300;
  auto consider = [&](const std::vector<double>& c) {
    best = std::min(best, std::sqrt(squared_distance(x, c)));
  };
  if (const auto* p = std::get_if<EllipseParams>(&params)) {
    consider(p->focus1);
    consider(p->focus2);
  } else if (const auto* p = std::get_if<HyperParams>(&params)) {
    consider(p->focus1);
    consider(p->focus2);
  } else if (const auto* p = std::get_if<ParaParams>(&params)) {
    consider(p->focus);
  }
  return best;
}

}  // namespace

TEST_CASE("compute_range envelopes the node set") {
  const auto single = compute_range(points_from({{1, 2}}));
  CHECK(single.lower == std::vector<double>{1, 2});
  CHECK(single.upper == std::vector<double>{1, 2});

  const auto two = compute_range(points_from({{0, 0}, {3, -1}}));
  CHECK(two.lower == std::vector<double>{0, -1});
  CHECK(two.upper == std::vector<double>{3, 0});

  Rng rng(7);
  Matrix cloud(100, 2);
  for (auto& v : cloud.values()) v = rng.uniform01();
  const auto box = compute_range(cloud);
  for (int j = 0; j < 2; ++j) {
    CHECK(box.lower[j] >= 0.0);
    CHECK(box.upper[j] <= 1.0);
    CHECK(box.lower[j] <= box.upper[j]);
  }

  CHECK_THROWS_AS(compute_range(Matrix(0, 2)), DataError);
}

TEST_CASE("if sampling is uniform over features") {
  Rng setup(3);
  const auto Y = random_points(32, 6, setup);
  const auto range = compute_range(Y);
  Rng rng(42);
  std::array<int, 6> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto params = sample_params(descriptor(SplitFamily::kIf), range, rng);
    counts[static_cast<std::size_t>(std::get<IfParams>(params).feature)]++;
  }
  for (int c : counts)
    CHECK(std::abs(c / static_cast<double>(draws) - 1.0 / 6.0) < 0.02);
}

TEST_CASE("eif directions are sphere-uniform") {
  Rng setup(5);
  const auto Y = random_points(16, 3, setup);
  const auto range = compute_range(Y);
  Rng rng(99);
  std::array<double, 3> mean{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto params = sample_params(descriptor(SplitFamily::kEif), range, rng);
    const auto& v = std::get<EifParams>(params).direction;
    CHECK(std::abs(norm(v) - 1.0) < 1e-9);
    for (int j = 0; j < 3; ++j) mean[j] += v[j];
  }
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / draws) < 0.02);
}

TEST_CASE("centers and foci stay inside the node range") {
  const auto Y = points_from({{0, 2}, {1, 3}});
  const auto range = compute_range(Y);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto params = sample_params(descriptor(SplitFamily::kHif), range, rng);
    const auto& c = std::get<HifParams>(params).center;
    CHECK(c[0] >= 0.0);
    CHECK(c[0] <= 1.0);
    CHECK(c[1] >= 2.0);
    CHECK(c[1] <= 3.0);
  }
  for (int i = 0; i < 500; ++i) {
    const auto params = sample_params(descriptor(SplitFamily::kEllipse), range, rng);
    const auto& p = std::get<EllipseParams>(params);
    for (const auto* c : {&p.focus1, &p.focus2}) {
      CHECK((*c)[0] >= 0.0);
      CHECK((*c)[0] <= 1.0);
      CHECK((*c)[1] >= 2.0);
      CHECK((*c)[1] <= 3.0);
    }
  }
}

TEST_CASE("evaluate matches the closed forms") {
  const std::array<double, 2> x34{3, 4};
  CHECK(evaluate(SplitParams{HifParams{{0, 0}}}, x34) == 25.0);

  const std::array<double, 2> x10{1, 0};
  CHECK(evaluate(SplitParams{EllipseParams{{0, 0}, {2, 0}}}, x10) == 2.0);
  CHECK(evaluate(SplitParams{HyperParams{{0, 0}, {2, 0}}}, x10) == 0.0);

  QuadParams q;
  q.a = Matrix(2, 2);
  q.a(0, 0) = q.a(1, 1) = 1.0;
  q.linear = {0, 0};
  const std::array<double, 2> x11{1, 1};
  CHECK(evaluate(SplitParams{std::move(q)}, x11) == 4.0);

  const std::array<double, 2> xs{0.5, 2.0};
  CHECK(evaluate(SplitParams{SineParams{}}, xs) == 2.0 - std::sin(0.5));

  CHECK_THROWS_AS(evaluate(SplitParams{HifParams{{0, 0, 0}}}, x34), DimensionError);
}

TEST_CASE("analytic gradients match hand values") {
  const std::array<double, 2> x34{3, 4};
  const auto g_hif = gradient(SplitParams{HifParams{{0, 0}}}, x34);
  CHECK(g_hif[0] == 6.0);
  CHECK(g_hif[1] == 8.0);

  const std::array<double, 2> x11{1, 1};
  const SplitParams ellipse{EllipseParams{{0, 0}, {2, 0}}};
  const auto g_ell = gradient(ellipse, x11);
  CHECK(std::abs(g_ell[0] - 0.0) < 1e-12);
  CHECK(std::abs(g_ell[1] - std::sqrt(2.0)) < 1e-12);
  const auto fd = oracles::finite_difference_gradient(ellipse, x11);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(g_ell[j] - fd[j]) < 1e-5);
}

TEST_CASE("gradients match finite differences for every family") {
  for (const SplitFamily family : kAllFamilies) {
    const std::size_t d = family == SplitFamily::kSine ? 2 : 5;
    Rng rng(1000 + static_cast<int>(family));
    const auto Y = random_points(64, d, rng);
    const auto range = compute_range(Y);
    // Linear and polynomial families have an exact-to-roundoff FD match.
    const bool polynomial =
        family == SplitFamily::kIf || family == SplitFamily::kEif ||
        family == SplitFamily::kHif || family == SplitFamily::kQuad;
    const double tol = polynomial ? 1e-5 : 1e-4;
    int checked = 0;
    while (checked < 1000) {
      const auto params = sample_params(descriptor(family), range, rng);
      std::vector<double> x(d);
      for (auto& v : x) v = rng.uniform(-3.0, 4.0);
      if (min_focus_distance(params, x) < 1e-4) continue;  // singularity guard
      const auto analytic = gradient(params, x);
      const auto fd = oracles::finite_difference_gradient(params, x);
      double err2 = 0.0, norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        err2 += (analytic[j] - fd[j]) * (analytic[j] - fd[j]);
        norm2 += analytic[j] * analytic[j];
      }
      const double rel = std::sqrt(err2) / std::max(1e-8, std::sqrt(norm2));
      if (rel >= tol) {
        CAPTURE(family_name(family), checked, rel);
        REQUIRE(rel < tol);
      }
      ++checked;
    }
  }
}

TEST_CASE("evaluate and gradient are pure") {
  Rng rng(77);
  const auto Y = random_points(32, 4, rng);
  const auto range = compute_range(Y);
  for (const SplitFamily family :
       {SplitFamily::kHif, SplitFamily::kQuad, SplitFamily::kNn}) {
    const auto params = sample_params(descriptor(family), range, rng);
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const double f1 = evaluate(params, x);
    const double f2 = evaluate(params, x);
    CHECK(std::memcmp(&f1, &f2, sizeof(double)) == 0);
    const auto g1 = gradient(params, x);
    const auto g2 = gradient(params, x);
    CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("unit-norm invariants and exact zero linear term") {
  Rng rng(13);
  const auto Y = random_points(32, 4, rng);
  const auto range = compute_range(Y);
  for (int i = 0; i < 200; ++i) {
    const auto eif = sample_params(descriptor(SplitFamily::kEif), range, rng);
    CHECK(std::abs(norm(std::get<EifParams>(eif).direction) - 1.0) < 1e-9);
    const auto para = sample_params(descriptor(SplitFamily::kPara), range, rng);
    CHECK(std::abs(norm(std::get<ParaParams>(para).direction) - 1.0) < 1e-9);
  }
  SplitFamilyDescriptor quad0 = descriptor(SplitFamily::kQuad);
  quad0.quad_lambda = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto params = sample_params(quad0, range, rng);
    for (double v : std::get<QuadParams>(params).linear) CHECK(v == 0.0);
  }
}

TEST_CASE("degenerate foci are legal") {
  const std::vector<double> c{0.5, -0.5};
  const std::array<double, 2> x{2.0, 1.0};
  const double d = std::sqrt(squared_distance(x, c));
  CHECK(evaluate(SplitParams{EllipseParams{c, c}}, x) == Catch::Approx(2.0 * d));
  CHECK(evaluate(SplitParams{HyperParams{c, c}}, x) == 0.0);
  // Gradient at the shared focus: radial terms vanish.
  const auto g = gradient(SplitParams{EllipseParams{c, c}}, std::span<const double>(c));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("descriptor validation") {
  SplitFamilyDescriptor nn = descriptor(SplitFamily::kNn);
  const auto resolved = nn.resolved(3);
  REQUIRE(resolved.nn_hidden_widths == std::vector<int>{8, 8});
  const auto wide = nn.resolved(12);
  REQUIRE(wide.nn_hidden_widths == std::vector<int>{12, 12});

  nn.nn_hidden_widths = {4, -1};
  CHECK_THROWS_AS(nn.resolved(3), ConfigError);

  SplitFamilyDescriptor sine = descriptor(SplitFamily::kSine);
  CHECK_NOTHROW(sine.resolved(2));
  CHECK_THROWS_AS(sine.resolved(6), ConfigError);

  SplitFamilyDescriptor quad = descriptor(SplitFamily::kQuad);
  quad.quad_lambda = -1.0;
  CHECK_THROWS_AS(quad.resolved(3), ConfigError);

  CHECK_THROWS_AS(parse_family("bogus"), ConfigError);
  CHECK(parse_family("ellipse") == SplitFamily::kEllipse);
}
