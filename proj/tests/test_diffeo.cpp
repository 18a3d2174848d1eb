#include <doctest.h>

#include "oracles.hpp"
#include "selfsim/diffeo.hpp"
#include "selfsim/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

using namespace selfsim;

TEST_CASE("bump profile basics") {
  CHECK(bump_profile(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(2.5) == 0.0);
  CHECK(bump_profile_deriv(0.0) == 0.0);
  // sup|beta'| sits near s = 0.76 and bounds the admissible amplitude
  const double m = bump_slope_max();
  CHECK(m > 0.75);
  CHECK(m < 0.85);
  for (double s : {0.1, 0.3, 0.5, 0.7, 0.76, 0.9, 0.99})
    CHECK(std::fabs(bump_profile_deriv(s)) <= m + 1e-12);
}

TEST_CASE("zero amplitude is the identity map") {
  const Diffeo id = Diffeo::identity(2);
  Point x(2);
  x << 3.2, -1.0;
  const Point y = id.apply(x);
  CHECK(y[0] == 3.2);
  CHECK(y[1] == -1.0);
  CHECK(id.jacobian(x) == 1.0);
}

TEST_CASE("1-D bump at the center: apply(0) = a * exp(-1)") {
  const Diffeo phi = bump_flow1(0.0, 1.0, 0.1);
  CHECK(phi.apply1(0.0) == doctest::Approx(0.1 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(phi.apply1(0.0) == doctest::Approx(0.036787944117144233).epsilon(1e-14));
  // outside the support: bitwise identity
  CHECK(phi.apply1(5.0) == 5.0);
  CHECK(phi.apply1(-1.0) == -1.0);
  CHECK(phi.apply1(1.0) == 1.0);
}

TEST_CASE("support exactness: 10^4 points outside the ball return bitwise") {
  RngStream rng(11);
  const Diffeo phi = bump_flow1(0.3, 0.9, 0.2, -1.0);
  for (int i = 0; i < 5000; ++i) {
    const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double x = 0.3 + sgn * (0.9 + rng.uniform(0.0, 50.0));
    CHECK(phi.apply1(x) == x);
    CHECK(phi.jacobian1(x) == 1.0);
  }
  Point c(3), u(3);
  c << 1.0, -0.5, 0.0;
  u << 0.0, 0.0, 1.0;
  const Diffeo psi = bump_flow(3, c, 1.5, 0.4, u);
  for (int i = 0; i < 5000; ++i) {
    Point x(3);
    for (int k = 0; k < 3; ++k) x[k] = rng.uniform(-30.0, 30.0);
    if ((x - c).norm() < 1.5) continue;
    const Point y = psi.apply(x);
    CHECK(same_point(x, y));
    CHECK(psi.jacobian(x) == 1.0);
  }
}

TEST_CASE("amplitude beyond the injectivity bound is rejected with the bound") {
  const double bound = max_bump_amplitude(1.0);
  CHECK_THROWS_WITH_AS(bump_flow1(0.0, 1.0, bound * 1.01),
                       doctest::Contains("maximal admissible amplitude"),
                       std::invalid_argument);
  CHECK_THROWS_AS(bump_flow1(0.0, 1.0, bound), std::invalid_argument);
  CHECK_NOTHROW(bump_flow1(0.0, 1.0, bound * 0.999));
  CHECK_THROWS_AS(bump_flow1(0.0, -1.0, 0.1), std::invalid_argument);
  Point c = Point::Zero(2);
  Point u(2);
  u << 2.0, 0.0;  // not unit norm
  CHECK_THROWS_AS(bump_flow(2, c, 1.0, 0.1, u), std::invalid_argument);
}

TEST_CASE("jacobian: analytic value against the finite-difference oracle") {
  // d = 1, x = 0.5 * radius
  const Diffeo phi = bump_flow1(0.0, 1.0, 0.1);
  CHECK(phi.jacobian1(0.5) ==
        doctest::Approx(oracles::fd_jacobian(phi, point1(0.5))).epsilon(1e-6));
  // at the center the derivative of the profile vanishes
  CHECK(phi.jacobian1(0.0) == 1.0);

  RngStream rng(42);
  for (int d : {1, 2, 3}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Diffeo psi = oracles::random_bump(rng, d);
      Point x(d);
      for (int i = 0; i < d; ++i)
        x[i] = psi.support_center()[i] + rng.uniform(-1.0, 1.0) * psi.support_radius();
      const double analytic = psi.jacobian(x);
      const double fd = oracles::fd_jacobian(psi, x);
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
      CHECK(analytic > 0.0);
    }
  }
}

TEST_CASE("jacobian positivity at 10^4 random points for accepted amplitudes") {
  RngStream rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const Diffeo phi = oracles::random_bump(rng, 2, 2.0, 0.95);
    for (int i = 0; i < 1000; ++i) {
      Point x(2);
      x << rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0);
      CHECK(phi.jacobian(x) > 0.0);
    }
  }
}

TEST_CASE("compose: group law holds bitwise, jacobian chain rule to 1e-8") {
  RngStream rng(5);
  const Diffeo phi1 = oracles::random_bump(rng, 1);
  const Diffeo phi2 = oracles::random_bump(rng, 1);
  const Diffeo both = compose(phi1, phi2);

  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5.0, 5.0);
    CHECK(both.apply1(x) == phi2.apply1(phi1.apply1(x)));  // deferred application
    const double expected = phi1.jacobian1(x) * phi2.jacobian1(phi1.apply1(x));
    CHECK(both.jacobian1(x) == doctest::Approx(expected).epsilon(1e-8));
  }

  // compose with identity behaves pointwise as phi
  const Diffeo with_id = compose(phi1, Diffeo::identity(1));
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-5.0, 5.0);
    CHECK(with_id.apply1(x) == phi1.apply1(x));
  }

  Point c = Point::Zero(2);
  Point u(2);
  u << 1.0, 0.0;
  CHECK_THROWS_AS(compose(phi1, bump_flow(2, c, 1.0, 0.1, u)), std::invalid_argument);
}

TEST_CASE("inverse: round trips, inverse function theorem, composite inverse") {
  const Diffeo id_inv = inverse(Diffeo::identity(1));
  CHECK(id_inv.apply1(0.7) == 0.7);

  const Diffeo phi = bump_flow1(0.0, 1.0, 0.1);
  const Diffeo psi = inverse(phi);
  for (int i = 0; i <= 1000; ++i) {
    const double x = -1.2 + 2.4 * i / 1000.0;
    CHECK(psi.apply1(phi.apply1(x)) == doctest::Approx(x).epsilon(1e-10));
  }
  // jacobian(inverse(phi), phi(x)) = 1 / jacobian(phi, x)
  for (double x : {-0.9, -0.4, 0.1, 0.33, 0.8}) {
    CHECK(psi.jacobian1(phi.apply1(x)) ==
          doctest::Approx(1.0 / phi.jacobian1(x)).epsilon(1e-8));
  }

  // compose(phi, inverse(phi)) is the identity to 1e-10
  const Diffeo round = compose(phi, psi);
  for (double x : {-0.99, -0.5, 0.0, 0.21, 0.77, 3.0})
    CHECK(round.apply1(x) == doctest::Approx(x).epsilon(1e-10));

  // d = 2 via damped fixed-point iteration, near-maximal amplitude
  Point c(2), u(2);
  c << 0.5, -0.25;
  u << std::sqrt(0.5), std::sqrt(0.5);
  const Diffeo phi2 = bump_flow(2, c, 1.0, 0.9 * max_bump_amplitude(1.0), u);
  const Diffeo psi2 = inverse(phi2);
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    Point x(2);
    x << rng.uniform(-1.0, 2.0), rng.uniform(-1.5, 1.0);
    const Point back = psi2.apply(phi2.apply(x));
    CHECK((back - x).norm() <= 1e-10 * (1.0 + x.norm()));
  }
}

TEST_CASE("origin fixing") {
  // support ball excluding the origin fixes it bitwise
  const Diffeo away = bump_flow1(3.0, 1.0, 0.2);
  CHECK(away.fixes_origin());
  CHECK(away.apply1(0.0) == 0.0);

  // ball touching the origin on its boundary still fixes it (beta(1) = 0)
  const Diffeo touching = bump_flow1(1.0, 1.0, 0.2);
  CHECK(touching.fixes_origin());
  CHECK(touching.apply1(0.0) == 0.0);

  const Diffeo moving = bump_flow1(0.2, 1.0, 0.2);
  CHECK_FALSE(moving.fixes_origin());
  CHECK(moving.apply1(0.0) != 0.0);
  CHECK_THROWS_AS(bump_flow1(0.2, 1.0, 0.2, +1.0, /*require_fixed_origin=*/true),
                  std::invalid_argument);

  // zero amplitude always fixes the origin
  CHECK(Diffeo::identity(3).fixes_origin());
  CHECK(compose(away, touching).fixes_origin());
  CHECK(inverse(away).fixes_origin());
}

TEST_CASE("JSON round trip preserves the map") {
  RngStream rng(17);
  const Diffeo a = oracles::random_bump(rng, 2);
  const Diffeo b = oracles::random_bump(rng, 2);
  const Diffeo tree = compose(a, inverse(b));
  const Diffeo back = Diffeo::from_json(tree.to_json());
  for (int i = 0; i < 50; ++i) {
    Point x(2);
    x << rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0);
    CHECK(same_point(tree.apply(x), back.apply(x)));
  }
  CHECK(tree.to_json() == back.to_json());
}
