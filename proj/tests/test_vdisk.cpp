#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewlab/errors.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/vdisk.hpp"
#include "test_util.hpp"

using namespace skewlab;

TEST_CASE("push_disk: squaring a centered disk") {
  SkewMap z2 = load_map("z2.map");
  VerticalDisk disk = make_vertical_disk(Cplx(0, 0), Cplx(0, 0), 0.5);
  auto images = push_disk(z2, disk, 1, 2.1);
  REQUIRE(images.size() == 1);
  CHECK(images[0].z_n == Cplx(0, 0));
  for (const Cplx& w : images[0].boundary_images)
    CHECK(std::abs(std::abs(w) - 0.25) < 1e-12);
}

TEST_CASE("push_disk: two-step hand iteration for z^2 + t") {
  SkewMap map = load_map("z2_t.map");  // lambda = 0.1
  VerticalDisk disk = make_vertical_disk(Cplx(0.1, 0), Cplx(0, 0), 0.2);
  auto images = push_disk(map, disk, 2, 2.3);
  REQUIRE(images.size() == 2);
  // z1 = 0^2 + 0.1 ; z2 = z1^2 + lambda t0 = 0.01 + 0.01
  CHECK(std::abs(images[0].z_n - Cplx(0.1, 0)) < 1e-15);
  CHECK(std::abs(images[1].z_n - Cplx(0.02, 0)) < 1e-15);
  CHECK(images[0].t_n == map.lambda * Cplx(0.1, 0));
  CHECK(images[1].t_n == map.lambda * (map.lambda * Cplx(0.1, 0)));
}

TEST_CASE("push_disk escape truncation is flagged") {
  SkewMap z2 = load_map("z2.map");
  VerticalDisk disk = make_vertical_disk(Cplx(0, 0), Cplx(30, 0), 0.5);
  auto images = push_disk(z2, disk, 5, 2.1);
  CHECK(images.size() < 5);
  CHECK(images.back().truncated);
}

TEST_CASE("inradius: exact values") {
  SkewMap z2 = load_map("z2.map");
  VerticalDisk centered = make_vertical_disk(Cplx(0, 0), Cplx(0, 0), 0.5);
  auto im1 = push_disk(z2, centered, 1, 2.1);
  CHECK(inradius(im1[0]) == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(boundary_winding(im1[0]) == 2);

  VerticalDisk offset = make_vertical_disk(Cplx(0, 0), Cplx(1, 0), 0.1);
  auto im2 = push_disk(z2, offset, 1, 2.1);
  CHECK(inradius(im2[0]) == doctest::Approx(0.19).epsilon(1e-3));
  CHECK(boundary_winding(im2[0]) == 1);
}

TEST_CASE("inradius rejects a non-enclosing curve") {
  // artificial image whose curve misses z_n
  DiskImage img;
  img.n = 1;
  img.z_n = Cplx(10, 0);
  for (int k = 0; k < 64; ++k) {
    double a = 2.0 * M_PI * k / 64;
    img.boundary_images.push_back(Cplx(std::cos(a), std::sin(a)));
  }
  CHECK(boundary_winding(img) == 0);
  CHECK_THROWS_AS(inradius(img), DomainError);
}

TEST_CASE("grid membership oracle agrees with the boundary minimum") {
  Rng rng(181);
  for (int rep = 0; rep < 20; ++rep) {
    // random cubic fiber with modest coefficients, disk away from trouble
    SkewMap map;
    map.lambda = Cplx(0.1, 0);
    map.delta = 0.1;
    map.a = {FiberPoly({rng.in_disk(0.2)}), FiberPoly({rng.in_disk(0.5)}),
             FiberPoly({rng.in_disk(0.5)}), FiberPoly({Cplx(1, 0) + rng.in_disk(0.2)})};
    VerticalDisk disk =
        make_vertical_disk(Cplx(0, 0), Cplx(1, 0) + rng.in_disk(0.2), 0.05);
    auto images = push_disk(map, disk, 1, 1e9);
    if (boundary_winding(images[0]) == 0) continue;
    double exact = inradius(images[0]);
    double grid = grid_inradius_oracle(images[0], 512);
    CHECK(std::abs(grid - exact) <= 0.01 * std::max(grid, exact));
  }
}

TEST_CASE("rho_trace of the contracting affine toy") {
  // degree-1 sanity config (tests only): f = 0.5 z, lambda = 0.1
  SkewMap toy;
  toy.lambda = Cplx(0.1, 0);
  toy.delta = 0.5;
  toy.a = {FiberPoly({Cplx(0, 0)}), FiberPoly({Cplx(0.5, 0)})};
  VerticalDisk disk = make_vertical_disk(Cplx(0.1, 0), Cplx(0.3, 0), 0.05);
  RhoTrace trace = rho_trace(toy, disk, 12, 0.1, 1e9);
  REQUIRE(static_cast<int>(trace.rows.size()) == 12);
  for (const auto& row : trace.rows) {
    double want_rho = 0.05 * std::pow(0.5, row.n);
    CHECK(row.rho_n == doctest::Approx(want_rho).epsilon(1e-9));
    CHECK(row.ratio ==
          doctest::Approx(std::pow(0.1 / 0.5, row.n) / 0.05).epsilon(1e-9));
  }
}

TEST_CASE("rho_trace diagnostic: attracting case decreases, product case does not") {
  // positive control: f = 0.5z + z^2 + t, lambda = 0.05
  SkewMap half = load_map("half_t05.map");
  VerticalDisk good = make_vertical_disk(Cplx(0.01, 0), Cplx(0.05, 0), 0.02);
  RhoTrace ok = rho_trace(half, good, 25, std::abs(half.lambda), 10.0);
  REQUIRE(static_cast<int>(ok.rows.size()) == 25);
  for (size_t i = 5; i < ok.rows.size(); ++i)
    CHECK(ok.rows[i].ratio < ok.rows[i - 1].ratio);
  CHECK(ok.rows.back().ratio < 1e-6);
  // asymptotic per-step factor approaches |lambda| / |p'(0)| = 0.1
  double factor = ok.rows[20].ratio / ok.rows[19].ratio;
  CHECK(factor == doctest::Approx(0.1).epsilon(0.05));

  // negative control: superattracting fiber point of the product map
  SkewMap z2 = load_map("z2.map");
  VerticalDisk bad = make_vertical_disk(Cplx(0, 0), Cplx(0.5, 0), 0.1);
  RhoTrace contrast = rho_trace(z2, bad, 8, std::abs(z2.lambda), 2.1);
  REQUIRE(contrast.rows.size() >= 4);
  bool monotone = true;
  for (size_t i = 1; i < contrast.rows.size(); ++i)
    if (contrast.rows[i].ratio > contrast.rows[i - 1].ratio) monotone = false;
  CHECK(!monotone);
}

TEST_CASE("degree bound: calibration-then-holdout, plus exact ratios") {
  SkewMap z2 = load_map("z2.map");
  double R = escape_radius(z2);

  // inradius / r^2 = 1 for the centered disk, 19 for the offset one
  VerticalDisk centered = make_vertical_disk(Cplx(0, 0), Cplx(0, 0), 0.5);
  auto im = push_disk(z2, centered, 1, R);
  CHECK(inradius(im[0]) / 0.25 == doctest::Approx(1.0).epsilon(1e-3));
  VerticalDisk offset = make_vertical_disk(Cplx(0, 0), Cplx(1, 0), 0.1);
  auto im2 = push_disk(z2, offset, 1, R);
  CHECK(inradius(im2[0]) / 0.01 == doctest::Approx(19.0).epsilon(1e-3));

  for (const char* name : {"z2.map", "half_t05.map"}) {
    SkewMap map = load_map(name);
    double esc = escape_radius(map);
    Rng rng(411);
    auto draw = [&]() {
      return make_vertical_disk(rng.in_disk(map.delta / 2),
                                rng.in_disk(0.8 * esc),
                                0.02 * esc * std::pow(10.0, rng.uniform(-1.5, 0.0)));
    };
    std::vector<VerticalDisk> calib, fresh;
    for (int i = 0; i < 250; ++i) calib.push_back(draw());
    for (int i = 0; i < 250; ++i) fresh.push_back(draw());
    double c_fit = calibrate_degree_bound(map, calib, esc);
    CHECK(c_fit > 0.0);
    BoundReport rep = check_degree_bound(map, fresh, c_fit, esc);
    CHECK(rep.checked > 100);
    CHECK(rep.violations.empty());
  }
}

TEST_CASE("koebe bound: quarter-theorem arithmetic and holdout") {
  SkewMap z2 = load_map("z2.map");
  double R = escape_radius(z2);

  // eta = 0.9, measured inradius 0.19 >= Koebe prediction 0.05
  VerticalDisk disk = make_vertical_disk(Cplx(0, 0), Cplx(1, 0), 0.1);
  auto im = push_disk(z2, disk, 1, R);
  CHECK(inradius(im[0]) >= 0.25 * 2.0 * 0.1);

  // near-critical disks are skipped
  VerticalDisk hugging = make_vertical_disk(Cplx(0, 0), Cplx(0.1, 0), 0.1);
  BoundReport skip = check_koebe_bound(z2, {hugging}, 1e-3, R);
  CHECK(skip.skipped == 1);
  CHECK(skip.checked == 0);

  SkewMap cubic = load_map("cubic_tz2.map");
  double esc = escape_radius(cubic);
  Rng rng(517);
  auto draw = [&]() {
    return make_vertical_disk(rng.in_disk(cubic.delta / 2),
                              rng.in_disk(0.8 * esc),
                              0.01 * esc * std::pow(10.0, rng.uniform(-1.0, 0.0)));
  };
  std::vector<VerticalDisk> calib, fresh;
  for (int i = 0; i < 250; ++i) calib.push_back(draw());
  for (int i = 0; i < 250; ++i) fresh.push_back(draw());
  double c_fit = calibrate_koebe_bound(cubic, calib, esc);
  BoundReport rep = check_koebe_bound(cubic, fresh, c_fit, esc);
  CHECK(rep.checked > 50);
  CHECK(rep.violations.empty());
}

TEST_CASE("shadowing: m = 0 reduces to the radius precondition") {
  SkewMap map = load_map("half_t05.map");
  double R = escape_radius(map);
  double l3 = 0.3;
  int n = 3;
  VerticalDisk disk = make_vertical_disk(
      Cplx(0.5 * std::pow(0.05, n + 1), 0), Cplx(0.1, 0),
      0.9 * std::pow(l3, n + 1), 64);
  ShadowReport rep = shadowing_check(map, disk, n, 0, l3, R);
  CHECK(rep.checked == 64);
  CHECK(rep.violations == 0);

  VerticalDisk too_big =
      make_vertical_disk(Cplx(0, 0), Cplx(0.1, 0), 2.0 * std::pow(l3, n + 1));
  CHECK_THROWS_AS(shadowing_check(map, too_big, n, 0, l3, R), DomainError);
}

TEST_CASE("shadowing: product map and skew map two-track bounds") {
  SkewMap z2 = load_map("z2.map");
  double R2 = escape_radius(z2);
  VerticalDisk d1 = make_vertical_disk(Cplx(0, 0), Cplx(0.4, 0),
                                       0.5 * std::pow(0.3, 3), 64);
  ShadowReport r1 = shadowing_check(z2, d1, 2, 5, 0.3, R2);
  CHECK(r1.violations == 0);
  CHECK(r1.m_const >= 2.0 * 2.0 * R2 * 0.99);

  SkewMap half = load_map("half_t05.map");
  double Rh = escape_radius(half);
  VerticalDisk d2 = make_vertical_disk(Cplx(std::pow(0.05, 4), 0), Cplx(0.1, 0),
                                       0.7 * std::pow(0.3, 4), 64);
  ShadowReport r2 = shadowing_check(half, d2, 3, 5, 0.3, Rh);
  CHECK(r2.checked == 64);
  CHECK(r2.violations == 0);
  CHECK(r2.worst_margin <= 1.0);
}

TEST_CASE("refinement stability of the boundary sampling") {
  SkewMap map = load_map("half_t05.map");
  double R = escape_radius(map);
  Rng rng(623);
  int compared = 0;
  for (int i = 0; i < 20; ++i) {
    Cplx t0 = rng.in_disk(map.delta / 2);
    Cplx c = rng.in_disk(0.6 * R);
    double r = 0.05 * std::pow(10.0, rng.uniform(-1.0, 0.0));
    VerticalDisk a = make_vertical_disk(t0, c, r, 512);
    VerticalDisk b = make_vertical_disk(t0, c, r, 1024);
    auto ia = push_disk(map, a, 1, R);
    auto ib = push_disk(map, b, 1, R);
    if (boundary_winding(ia[0]) == 0 || boundary_winding(ib[0]) == 0) continue;
    double ra = inradius(ia[0]), rb = inradius(ib[0]);
    CHECK(std::abs(ra - rb) <= 0.01 * std::max(ra, rb));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("boundary containment at grid resolution") {
  // points within the inradius of z_n sit inside the sampled curve
  SkewMap map = load_map("half_t05.map");
  double R = escape_radius(map);
  VerticalDisk disk = make_vertical_disk(Cplx(0.01, 0), Cplx(0.3, 0), 0.08);
  auto images = push_disk(map, disk, 1, R);
  const DiskImage& img = images[0];
  REQUIRE(boundary_winding(img) != 0);
  double rho = inradius(img);
  double grid = grid_inradius_oracle(img, 512);
  // every grid point closer than rho is inside, so the oracle cannot be
  // smaller (up to one grid cell)
  double x0 = img.boundary_images[0].real(), x1 = x0;
  for (const Cplx& w : img.boundary_images) {
    x0 = std::min(x0, w.real());
    x1 = std::max(x1, w.real());
  }
  double cell = (x1 - x0) / 511.0;
  CHECK(grid >= rho - 2.0 * cell);
}
