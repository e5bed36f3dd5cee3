#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewlab/errors.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/roots.hpp"
#include "skewlab/skew_map.hpp"
#include "test_util.hpp"

using namespace skewlab;

TEST_CASE("eval_fiber on the worked examples") {
  SkewMap z2t = load_map("z2_t.map");
  CHECK(std::abs(eval_fiber(z2t, Cplx(0.1, 0), Cplx(2, 0)) - Cplx(4.1, 0)) < 1e-15);

  SkewMap z2 = load_map("z2.map");
  CHECK(eval_fiber(z2, Cplx(0.2, 0), Cplx(0, 0)) == Cplx(0, 0));

  SkewMap half = load_map("half_t.map");
  CHECK(std::abs(eval_fiber(half, Cplx(0.01, 0), Cplx(-0.5, 0)) - Cplx(0.01, 0)) <
        1e-15);
}

TEST_CASE("eval_fiber rejects |t| > delta") {
  SkewMap z2t = load_map("z2_t.map");
  CHECK_THROWS_AS(eval_fiber(z2t, Cplx(0.6, 0), Cplx(0, 0)), DomainError);
}

TEST_CASE("apply on the worked examples") {
  SkewMap z2t = load_map("z2_t.map");
  Point2 y = apply(z2t, {Cplx(0.2, 0), Cplx(1, 0)});
  CHECK(std::abs(y.t - Cplx(0.02, 0)) < 1e-15);
  CHECK(std::abs(y.z - Cplx(1.2, 0)) < 1e-15);

  SkewMap z2 = load_map("z2.map");
  Point2 fixed = apply(z2, {Cplx(0, 0), Cplx(0, 0)});
  CHECK(fixed.t == Cplx(0, 0));
  CHECK(fixed.z == Cplx(0, 0));

  SkewMap half = load_map("half_t.map");
  // 0.5 * 0.25 + 0.0625 = 0.1875 on the invariant fiber
  Point2 w = apply(half, {Cplx(0, 0), Cplx(0.25, 0)});
  CHECK(std::abs(w.z - Cplx(0.1875, 0)) < 1e-15);
}

TEST_CASE("exact derivatives") {
  SkewMap z2t = load_map("z2_t.map");
  CHECK(std::abs(dz(z2t, Cplx(0.3, 0), Cplx(3, 0)) - Cplx(6, 0)) < 1e-15);
  CHECK(std::abs(dt(z2t, Cplx(0.3, 0), Cplx(3, 0)) - Cplx(1, 0)) < 1e-15);

  SkewMap z2 = load_map("z2.map");
  CHECK(dz(z2, Cplx(0.1, 0), Cplx(0, 0)) == Cplx(0, 0));

  SkewMap half = load_map("half_t.map");
  CHECK(std::abs(dz(half, Cplx(0, 0), Cplx(-0.25, 0))) < 1e-15);
}

TEST_CASE("derivatives agree with central differences") {
  SkewMap half = load_map("half_t03.map");
  Rng rng(402);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    Cplx t = rng.in_disk(0.9 * half.delta);
    Cplx z = rng.in_disk(2.0);
    Cplx fd_z = (eval_fiber(half, t, z + h) - eval_fiber(half, t, z - h)) / (2 * h);
    Cplx fd_t = (eval_fiber(half, t + h, z) - eval_fiber(half, t - h, z)) / (2 * h);
    CHECK(std::abs(fd_z - dz(half, t, z)) <= 1e-5 * (1.0 + std::abs(fd_z)));
    CHECK(std::abs(fd_t - dt(half, t, z)) <= 1e-5 * (1.0 + std::abs(fd_t)));
  }
}

TEST_CASE("orbit early escape and fixed points") {
  SkewMap z2 = load_map("z2.map");
  Orbit esc = orbit(z2, {Cplx(0, 0), Cplx(2, 0)}, 10, 2.0);
  REQUIRE(esc.escaped_at.has_value());
  CHECK(*esc.escaped_at == 1);  // z_1 = 4
  CHECK(esc.points.size() == 2);

  Orbit fix = orbit(z2, {Cplx(0, 0), Cplx(0, 0)}, 7, 2.0);
  CHECK(!fix.escaped_at.has_value());
  CHECK(fix.points.size() == 8);
  for (const Point2& x : fix.points) CHECK(x.z == Cplx(0, 0));

  SkewMap cheb = load_map("cheb.map");
  Orbit c = orbit(cheb, {Cplx(0, 0), Cplx(0, 0)}, 6, 10.0);
  CHECK(std::abs(c.points[1].z - Cplx(-2, 0)) < 1e-15);
  CHECK(std::abs(c.points[2].z - Cplx(2, 0)) < 1e-15);
  CHECK(std::abs(c.points[3].z - Cplx(2, 0)) < 1e-15);
}

TEST_CASE("first coordinate is the exact power lambda^n t") {
  SkewMap half = load_map("half_t.map");
  Point2 x{Cplx(0.07, 0.02), Cplx(0.1, 0)};
  Orbit orb = orbit(half, x, 15, 100.0);
  Cplx t = x.t;
  for (size_t k = 0; k < orb.points.size(); ++k) {
    CHECK(orb.points[k].t == t);  // bit-for-bit
    t *= half.lambda;
  }
}

TEST_CASE("orbit semigroup property") {
  SkewMap half = load_map("half_t05.map");
  Rng rng(91);
  for (int rep = 0; rep < 20; ++rep) {
    Point2 x{rng.in_disk(half.delta), rng.in_disk(0.3)};
    int n = 1 + int(rng.below(10)), m = 1 + int(rng.below(10));
    Orbit both = orbit(half, x, n + m, 1e9);
    Orbit first = orbit(half, x, n, 1e9);
    Orbit second = orbit(half, first.points.back(), m, 1e9);
    Cplx a = both.points.back().z;
    Cplx b = second.points.back().z;
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("escape radius: closed-form quadratic oracles") {
  // f = z^2: |z|^2 >= 2|z| from |z| >= 2
  SkewMap z2 = load_map("z2.map");
  double r1 = escape_radius(z2);
  CHECK(r1 >= 2.0);
  CHECK(r1 <= 2.0 * 1.05);

  // f = z^2 + t, delta = 0.5: R^2 - 0.5 >= 2R at R = 1 + sqrt(1.5)
  SkewMap z2t = load_map("z2_t.map");
  double root = 1.0 + std::sqrt(1.5);
  double r2 = escape_radius(z2t);
  CHECK(r2 >= root);
  CHECK(r2 <= root * 1.05);
  CHECK(r2 >= 2.21);
  CHECK(r2 <= 2.33);

  // f = 0.5z + z^2 + t, delta = 0.1: R^2 - (0.5R + 0.1) >= 2R
  SkewMap half = load_map("half_t.map");
  double root3 = (2.5 + std::sqrt(6.65)) / 2.0;
  double r3 = escape_radius(half);
  CHECK(r3 >= root3);
  CHECK(r3 <= root3 * 1.05);
}

TEST_CASE("escape radius certificate on random samples") {
  SkewMap map = load_map("half_t03.map");
  double R = escape_radius(map);
  Rng rng(1234);
  for (int i = 0; i < 10000; ++i) {
    Cplx t = rng.in_disk(map.delta);
    double radius = R * (1.0 + 3.0 * rng.uniform());  // |z| in (R, 4R]
    Cplx z = rng.on_circle(radius);
    CHECK(std::abs(eval_fiber(map, t, z)) >= 2.0 * std::abs(z));
  }
}

TEST_CASE("escape radius rejects a vanishing leading coefficient") {
  // a_2(t) = t vanishes at t = 0
  SkewMap bad;
  bad.lambda = Cplx(0.1, 0);
  bad.delta = 0.5;
  bad.a = {FiberPoly({Cplx(0, 0)}), FiberPoly({Cplx(0, 0)}),
           FiberPoly({Cplx(0, 0), Cplx(1, 0)})};
  CHECK_THROWS_AS(escape_radius(bad), DomainError);
}

TEST_CASE("koenigs: quadratic oracle c2 = 100/9") {
  FiberPoly g({Cplx(0, 0), Cplx(0.1, 0), Cplx(1, 0)});  // 0.1 t + t^2
  TSeries phi = koenigs_linearize(g, Cplx(0, 0), 20);
  CHECK(phi.at(0) == Cplx(0, 0));
  CHECK(std::abs(phi.at(1) - Cplx(1, 0)) < 1e-14);
  CHECK(std::abs(phi.at(2) - Cplx(100.0 / 9.0, 0)) < 1e-9);

  // functional-equation residual on |t| = radius/2
  Cplx mu(0.1, 0);
  double worst = 0.0;
  for (int s = 0; s < 257; ++s) {
    double a = 2.0 * M_PI * s / 257;
    Cplx t = 0.5 * phi.radius * Cplx(std::cos(a), std::sin(a));
    worst = std::max(worst, std::abs(phi.eval(g.eval(t)) - mu * phi.eval(t)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("koenigs: linear map is already linear") {
  FiberPoly g({Cplx(0, 0), Cplx(0.5, 0)});
  TSeries phi = koenigs_linearize(g, Cplx(0, 0), 12);
  CHECK(std::abs(phi.at(1) - Cplx(1, 0)) < 1e-14);
  for (int k = 2; k <= phi.order(); ++k) CHECK(std::abs(phi.at(k)) < 1e-14);
}

TEST_CASE("koenigs: cubic oracle c3 = 125/24") {
  FiberPoly g({Cplx(0, 0), Cplx(0.2, 0), Cplx(0, 0), Cplx(1, 0)});
  TSeries phi = koenigs_linearize(g, Cplx(0, 0), 16);
  CHECK(std::abs(phi.at(2)) < 1e-12);
  CHECK(std::abs(phi.at(3) - Cplx(125.0 / 24.0, 0)) < 1e-9);
}

TEST_CASE("koenigs: fixed point polish and multiplier guard") {
  FiberPoly g({Cplx(0, 0), Cplx(0.1, 0), Cplx(1, 0)});
  // a rounded fixed point gets polished back to 0
  TSeries phi = koenigs_linearize(g, Cplx(1e-9, 0), 8);
  CHECK(std::abs(phi.at(2) - Cplx(100.0 / 9.0, 0)) < 1e-6);

  FiberPoly expanding({Cplx(0, 0), Cplx(1.5, 0), Cplx(1, 0)});
  CHECK_THROWS_AS(koenigs_linearize(expanding, Cplx(0, 0), 8), ResonanceError);
}

TEST_CASE("map description parsing is strict") {
  CHECK_THROWS_AS(parse_map_description("lambda = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_map_description("lambda = 0.1\ndelta = 1\ndegree = 2\nbogus = 1\n"),
      ConfigError);
  // leading coefficient zero at t = 0
  CHECK_THROWS_AS(parse_map_description("lambda = 0.1\ndelta = 1\ndegree = 2\n"
                                        "coeff[2] = 0, 1\n"),
                  ConfigError);
  // |lambda| >= 1
  CHECK_THROWS_AS(parse_map_description("lambda = 1.5\ndelta = 1\ndegree = 2\n"
                                        "coeff[2] = 1\n"),
                  ConfigError);

  SkewMap ok = parse_map_description(
      "lambda = 0.1+0.05i\ndelta = 0.5\ndegree = 2\ncoeff[0] = -2\ncoeff[2] = 1\n");
  CHECK(ok.degree() == 2);
  CHECK(std::abs(ok.lambda - Cplx(0.1, 0.05)) < 1e-15);
}

TEST_CASE("aberth root finder against factored polynomials") {
  // (z - 1)(z + 2)(z - 3i) = z^3 + (1-3i) z^2 + (-2-3i) z + 6i
  FiberPoly p({Cplx(0, 6), Cplx(-2, -3), Cplx(1, -3), Cplx(1, 0)});
  Cplx want[] = {Cplx(1, 0), Cplx(-2, 0), Cplx(0, 3)};
  auto roots = aberth_roots(p);
  REQUIRE(roots.size() == 3);
  for (Cplx w : want) {
    double best = 1e9;
    for (Cplx r : roots) best = std::min(best, std::abs(r - w));
    CHECK(best < 1e-10);
  }
}
