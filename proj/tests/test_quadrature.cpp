#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nlvc/errors.hpp"
#include "nlvc/quadrature.hpp"
#include "oracles.hpp"

using namespace nlvc;
using std::numbers::pi;

namespace {

SquareWithLayer square(double delta) {
  SquareWithLayer s;
  s.horizon = delta;
  return s;
}

AnnulusWithLayer annulus(double delta) {
  AnnulusWithLayer a;
  a.horizon = delta;
  return a;
}

bool in_annulus(Vec2 p, double delta) {
  const double r = norm(p);
  return r >= 1 - 2 * delta && r <= 1.5 + 2 * delta;
}

/// Largest relative moment residual of point i's stencil against `target`.
double moment_residual(const PointCloud& cloud, const QuadratureRule& rule, std::size_t i, const MomentVector& target) {
  const double delta = rule.delta();
  const auto nb = rule.neighbors(i);
  const auto w = rule.weights(i);
  double worst = 0.0;
  for (int d = 0; d <= rule.degree(i); ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      double s = 0.0;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const Vec2 z = cloud.offset(i, nb[k]);
        s += w[k] * std::pow(z.x, a) * std::pow(z.y, b);
      }
      const double m = target.at(a, b);
      const double scale = std::max(std::abs(m), target.at(0, 0) * std::pow(delta, d));
      worst = std::max(worst, std::abs(s - m) / scale);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("full ball moments") {
  const MomentVector m = full_ball_moments(0.25, 4);
  CHECK(m.at(0, 0) == doctest::Approx(pi * 0.0625).epsilon(1e-15));
  CHECK(m.at(0, 0) == doctest::Approx(0.19635).epsilon(1e-5));
  CHECK(m.at(1, 0) == 0.0);
  CHECK(m.at(1, 1) == 0.0);
  CHECK(m.at(3, 0) == 0.0);
  CHECK(full_ball_moments(1.0, 2).at(2, 0) == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK(m.at(2, 0) == doctest::Approx(m.at(0, 2)).epsilon(1e-15));
  CHECK(m.at(4, 0) == doctest::Approx(pi * std::pow(0.25, 6) / 8).epsilon(1e-14));
  CHECK(m.at(2, 2) == doctest::Approx(pi * std::pow(0.25, 6) / 24).epsilon(1e-14));
}

TEST_CASE("bond quartic moments of the full ball") {
  const double delta = 0.3;
  const MomentVector m = full_ball_moments(delta, 3, true);
  REQUIRE(m.bond.size() == 2);
  // int cos^4 = 3 pi / 4, int r^3 dr = delta^4 / 4
  CHECK(m.bond[0] == doctest::Approx(3 * pi / 16 * std::pow(delta, 4)).epsilon(1e-14));
  CHECK(std::abs(m.bond[1]) < 1e-16);
}

TEST_CASE("truncated moments") {
  const double delta = 0.25;
  SUBCASE("ball inside equals the full ball") {
    const MomentVector t = truncated_ball_moments({0.5, 0.5}, delta, square(delta), 3);
    const MomentVector f = full_ball_moments(delta, 3);
    for (std::size_t k = 0; k < f.poly.size(); ++k) CHECK(std::abs(t.poly[k] - f.poly[k]) <= 1e-14);
  }
  SUBCASE("half disk at the square edge") {
    const MomentVector t = truncated_ball_moments({1 + delta, 0.5}, delta, square(delta), 3, 8);
    CHECK(std::abs(t.at(0, 0) - pi * delta * delta / 2) < 1e-6);
    CHECK(t.at(0, 0) == doctest::Approx(0.09817).epsilon(1e-4));
    CHECK(t.at(1, 0) == doctest::Approx(-2 * std::pow(delta, 3) / 3).epsilon(1e-10));
    CHECK(std::abs(t.at(0, 1)) < 1e-14);
  }
  SUBCASE("corner quarter disk") {
    const MomentVector t = truncated_ball_moments({1 + delta, 1 + delta}, delta, square(delta), 2);
    CHECK(t.at(0, 0) == doctest::Approx(pi * delta * delta / 4).epsilon(1e-12));
  }
  SUBCASE("inner edge of the annulus against Monte Carlo") {
    const double d = 0.15;
    const Vec2 c{1 - 2 * d + 0.02, 0.03};
    const MomentVector t = truncated_ball_moments(c, d, annulus(d), 2);
    const int exps[][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}};
    unsigned seed = 11;
    for (const auto& e : exps) {
      const auto est = oracle::mc_moment(c, d, [&](Vec2 p) { return in_annulus(p, d); }, e[0], e[1], 10'000'000, seed++);
      CHECK(std::abs(t.at(e[0], e[1]) - est.mean) <= 3 * est.stderr_ + 1e-15);
    }
  }
  SUBCASE("converges with refinement") {
    const double d = 0.2;
    const Vec2 c{0.45, 0.95};
    const auto ref = truncated_ball_moments(c, d, annulus(d), 3, 32);
    const auto lo = truncated_ball_moments(c, d, annulus(d), 3, 1);
    const auto hi = truncated_ball_moments(c, d, annulus(d), 3, 8);
    CHECK(std::abs(hi.at(0, 0) - ref.at(0, 0)) <= std::abs(lo.at(0, 0) - ref.at(0, 0)) + 1e-15);
    CHECK(std::abs(hi.at(0, 0) - ref.at(0, 0)) < 1e-12);
  }
}

TEST_CASE("weights at an interior point") {
  const double delta = 0.25;
  const PointCloud cloud(square(delta), delta / 2.5);
  const std::size_t i = *cloud.find({5, 5});
  const MomentVector m = full_ball_moments(delta, 3);
  const StencilWeights sw = compute_weights(cloud, i, delta, m);
  double sum = 0.0;
  for (double w : sw.weights) sum += w;
  CHECK(sum == doctest::Approx(pi * delta * delta).epsilon(1e-12));

  SUBCASE("degree zero gives uniform weights on a symmetric stencil") {
    const StencilWeights w0 = compute_weights(cloud, i, delta, full_ball_moments(delta, 0));
    for (double w : w0.weights) CHECK(w == doctest::Approx(pi * delta * delta / w0.weights.size()).epsilon(1e-12));
  }
  SUBCASE("too few neighbors") {
    const PointCloud coarse(square(delta), delta / 1.2);
    CHECK_THROWS_AS(compute_weights(coarse, *coarse.find({2, 2}), delta, full_ball_moments(delta, 3)),
                    QuadratureError);
  }
}

TEST_CASE("moment reproduction at every point") {
  for (const auto& [d, ratio] : {std::pair<DomainShape, double>{square(0.25), 3.1}, {annulus(0.3), 3.2}}) {
    const double delta = horizon_of(d);
    const PointCloud cloud(d, delta / ratio);
    const QuadratureRule rule = build_quadrature_rule(cloud, delta, RuleOptions{});
    const KernelSpec kernel = lps_indicator_kernel(delta);
    double worst = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      REQUIRE(rule.has(i));
      const MomentVector target = rule.truncated(i)
                                      ? truncated_ball_moments(cloud.point(i), delta, d, rule.degree(i))
                                      : full_ball_moments(delta, rule.degree(i));
      worst = std::max(worst, moment_residual(cloud, rule, i, target));
      CHECK(discrete_m(cloud, i, rule, kernel) > 0.0);
      if (!rule.truncated(i)) CHECK(rule.degree(i) == 3);
      for (double w : rule.weights(i)) CHECK(std::isfinite(w));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("bond quartic constraints are reproduced") {
  const double delta = 0.3;
  const PointCloud cloud(annulus(delta), delta / 3.2);
  RuleOptions opt;
  opt.bond_quartic = true;
  const QuadratureRule rule = build_quadrature_rule(cloud, delta, opt);
  const MomentVector m = full_ball_moments(delta, 3, true);
  for (std::size_t i = 0; i < cloud.size(); i += 5) {
    if (rule.truncated(i)) continue;
    const auto nb = rule.neighbors(i);
    const auto w = rule.weights(i);
    for (std::size_t k = 0; k < kBondQuarticExponents.size(); ++k) {
      const auto& e = kBondQuarticExponents[k];
      double s = 0.0;
      for (std::size_t q = 0; q < nb.size(); ++q) {
        const Vec2 z = cloud.offset(i, nb[q]);
        s += w[q] * std::pow(z.x, e[0]) * std::pow(z.y, e[1]) / dot(z, z);
      }
      CHECK(std::abs(s - m.bond[k]) <= 1e-12 * m.at(0, 0) * delta * delta);
    }
  }
}

TEST_CASE("discrete m") {
  const double delta = 0.25;
  const PointCloud cloud(square(delta), delta / 3.1);
  const QuadratureRule rule = build_quadrature_rule(cloud, delta, RuleOptions{});
  const KernelSpec kernel = lps_indicator_kernel(delta);
  const std::size_t a = *cloud.find({5, 5});
  const std::size_t b = *cloud.find({7, 4});
  CHECK(discrete_m(cloud, a, rule, kernel) == doctest::Approx(pi * std::pow(delta, 4) / 2).epsilon(1e-12));
  CHECK(discrete_m(cloud, a, rule, kernel) == discrete_m(cloud, b, rule, kernel));

  SUBCASE("half ball at a straight edge") {
    const double h = cloud.spacing();
    const std::size_t e = *cloud.find({static_cast<std::int64_t>(std::floor((1 + delta) / h + 1e-9)), 6});
    const Vec2 p = cloud.point(e);
    REQUIRE(rule.truncated(e));
    REQUIRE(rule.degree(e) >= 2);
    const auto t = truncated_ball_moments(p, delta, square(delta), 2);
    CHECK(discrete_m(cloud, e, rule, kernel) == doctest::Approx(t.at(2, 0) + t.at(0, 2)).epsilon(1e-12));

    const double d3 = 0.3;
    const PointCloud exact(square(d3), 0.1);
    const QuadratureRule r3 = build_quadrature_rule(exact, d3, RuleOptions{});
    const std::size_t edge = *exact.find({13, 5});
    REQUIRE(exact.point(edge).x == doctest::Approx(1 + d3));
    REQUIRE(r3.degree(edge) >= 2);
    CHECK(discrete_m(exact, edge, r3, lps_indicator_kernel(d3)) ==
          doctest::Approx(pi * std::pow(d3, 4) / 4).epsilon(1e-10));
  }
}

TEST_CASE("translation invariance of interior weights") {
  const double delta = 0.25;
  const PointCloud cloud(square(delta), delta / 3.1);
  const QuadratureRule rule = build_quadrature_rule(cloud, delta, RuleOptions{});
  const std::size_t a = *cloud.find({4, 4});
  const std::size_t b = *cloud.find({6, 8});
  const auto wa = rule.weights(a);
  const auto wb = rule.weights(b);
  REQUIRE(wa.size() == wb.size());
  for (std::size_t k = 0; k < wa.size(); ++k) {
    CHECK(cloud.offset(a, rule.neighbors(a)[k]) == cloud.offset(b, rule.neighbors(b)[k]));
    CHECK(wa[k] == doctest::Approx(wb[k]).epsilon(1e-13));
  }
}

TEST_CASE("weight cache round trip") {
  const double delta = 0.25;
  const PointCloud cloud(square(delta), delta / 2.5);
  const QuadratureRule rule = build_quadrature_rule(cloud, delta, RuleOptions{});
  std::stringstream io;
  write_weight_cache(io, rule, cloud);
  QuadratureRule back;
  REQUIRE(read_weight_cache(io, cloud, delta, back));
  REQUIRE(back.size() == rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    CHECK(back.degree(i) == rule.degree(i));
    const auto a = rule.weights(i);
    const auto b = back.weights(i);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
  std::stringstream other;
  write_weight_cache(other, rule, cloud);
  QuadratureRule wrong;
  CHECK_FALSE(read_weight_cache(other, cloud, 0.5, wrong));
}
