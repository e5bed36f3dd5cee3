#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "skewlab/dpu.hpp"
#include "skewlab/errors.hpp"
#include "skewlab/rng.hpp"
#include "test_util.hpp"

using namespace skewlab;

namespace {

FiberPoly poly_z2() { return FiberPoly({Cplx(0, 0), Cplx(0, 0), Cplx(1, 0)}); }
FiberPoly poly_cheb() { return FiberPoly({Cplx(-2, 0), Cplx(0, 0), Cplx(1, 0)}); }

// Brute-force oracle: minimum over all exactly-q index subsets of the sum
// after removal (== total minus the largest q values).
double brute_trim_min(const std::vector<double>& k, int q) {
  const int n = static_cast<int>(k.size());
  double total = 0.0;
  for (double v : k) total += v;
  double best = std::numeric_limits<double>::infinity();
  // enumerate combinations
  std::vector<bool> mask(n, false);
  std::fill(mask.end() - q, mask.end(), true);
  do {
    double removed = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask[i]) removed += k[i];
    best = std::min(best, total - removed);
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace

TEST_CASE("k_value worked examples") {
  KFunction kf{{Cplx(0, 0)}, 50.0};
  CHECK(std::abs(k_value(kf, Cplx(std::exp(-1.0), 0)) - 1.0) < 1e-12);
  CHECK(std::abs(k_value(kf, Cplx(1, 0))) < 1e-12);
  CHECK(k_value(kf, Cplx(0, 0)) == 50.0);
}

TEST_CASE("trimmed orbit sum on the explicit Chebyshev orbit") {
  FiberPoly p = poly_cheb();
  KFunction kf{{Cplx(0, 0)}, 50.0};

  // orbit 0, -2, 2, 2, ...: k = cap, then -log 2 repeated
  TrimReport r = trimmed_orbit_sum(p, kf, Cplx(0, 0), 10);
  REQUIRE(r.k_values.size() == 11);
  CHECK(r.k_values[0] == 50.0);
  REQUIRE(r.trimmed_indices.size() == 1);
  CHECK(r.trimmed_indices[0] == 0);
  CHECK(std::abs(r.trimmed_sum - (-10.0 * std::log(2.0))) < 1e-12);

  // fixed seed 2: all k = -log 2
  TrimReport r2 = trimmed_orbit_sum(p, kf, Cplx(2, 0), 5);
  CHECK(std::abs(r2.trimmed_sum - (-5.0 * std::log(2.0))) < 1e-12);

  // generic seed: finite sums
  TrimReport r3 = trimmed_orbit_sum(p, kf, Cplx(0.1, 0), 100);
  CHECK(std::isfinite(r3.trimmed_sum));
}

TEST_CASE("trimming matches the exhaustive subset oracle for n <= 15") {
  FiberPoly p = poly_cheb();
  KFunction kf{{Cplx(0, 0)}, 50.0};
  Rng rng(300);
  for (int rep = 0; rep < 20; ++rep) {
    Cplx seed(rng.uniform(-2.0, 2.0), rng.uniform(0.0, 1e-4));
    int n = 1 + static_cast<int>(rng.below(15));
    TrimReport r = trimmed_orbit_sum(p, kf, seed, n);
    CHECK(r.trimmed_sum == doctest::Approx(brute_trim_min(r.k_values, 1))
                               .epsilon(1e-14));
  }
}

TEST_CASE("cap independence when the cap is hit at most q times") {
  FiberPoly p = poly_cheb();
  KFunction k50{{Cplx(0, 0)}, 50.0};
  KFunction k100{{Cplx(0, 0)}, 100.0};
  // the critical-point seed hits the cap exactly once (0 maps off 0)
  TrimReport a = trimmed_orbit_sum(p, k50, Cplx(0, 0), 40);
  TrimReport b = trimmed_orbit_sum(p, k100, Cplx(0, 0), 40);
  CHECK(a.trimmed_sum == b.trimmed_sum);

  Rng rng(301);
  for (int rep = 0; rep < 10; ++rep) {
    Cplx seed(rng.uniform(-2.0, 2.0), 1e-4);
    TrimReport x = trimmed_orbit_sum(p, k50, seed, 60);
    int hits = 0;
    for (double v : x.k_values)
      if (v >= 50.0) ++hits;
    if (hits > 1) continue;
    TrimReport y = trimmed_orbit_sum(p, k100, seed, 60);
    CHECK(x.trimmed_sum == y.trimmed_sum);
  }
}

TEST_CASE("estimate_Q: vacuous for q = 0, stable for Chebyshev seeds") {
  FiberPoly z2 = poly_z2();
  KFunction empty{{}, 50.0};
  QEstimate vac = estimate_Q(z2, empty, {Cplx(0.5, 0)}, 100);
  CHECK(vac.q_hat == 0.0);

  FiberPoly p = poly_cheb();
  KFunction kf{{Cplx(0, 0)}, 50.0};
  std::vector<Cplx> seeds;
  for (int i = 0; i < 100; ++i)
    seeds.emplace_back(-2.0 + 4.0 * (i + 0.5) / 100.0, 1e-4);
  QEstimate est = estimate_Q(p, kf, seeds, 200);
  CHECK(std::isfinite(est.q_hat));
  CHECK(std::abs(est.q_hat - est.q_hat_half) <= 0.5 * std::abs(est.q_hat));

  // dyadic band: |q_hat| oscillates by at most 3x over n in {25,...,200}
  double lo = 1e300, hi = 0.0;
  for (int n : {25, 50, 100, 200}) {
    double v = std::abs(estimate_Q(p, kf, seeds, n).q_hat);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo <= 3.0);
}

TEST_CASE("cap never reaches the estimator when trimming absorbs it") {
  FiberPoly p = poly_cheb();
  // seed exactly at a preimage of the critical point: sqrt(2) -> 0 -> -2 ...
  Cplx seed = std::sqrt(Cplx(2, 0));
  KFunction k50{{Cplx(0, 0)}, 50.0};
  KFunction k100{{Cplx(0, 0)}, 100.0};
  TrimReport a = trimmed_orbit_sum(p, k50, seed, 50);
  TrimReport b = trimmed_orbit_sum(p, k100, seed, 50);
  CHECK(a.trimmed_sum == b.trimmed_sum);
}

TEST_CASE("backward contraction on the unit circle, exact powers") {
  FiberPoly p = poly_z2();
  JuliaCloud cloud = julia_cloud(p, 16384, 40, 7, 1e-3);

  BackwardCheck c1 =
      check_backward_contraction(p, cloud, Cplx(1.01, 0), 3, 1.0, 1.0, 2.1);
  CHECK(c1.holds);
  CHECK(c1.lhs == doctest::Approx(0.01).epsilon(0.5));
  CHECK(c1.rhs == doctest::Approx(std::pow(1.01, 8) - 1.0).epsilon(0.5));

  BackwardCheck c2 =
      check_backward_contraction(p, cloud, Cplx(0.9, 0), 2, 1.0, 1.0, 2.1);
  CHECK(c2.holds);

  // precondition |p^n(z)| < R violated -> distinct error, not "false"
  CHECK_THROWS_AS(
      check_backward_contraction(p, cloud, Cplx(1.2, 0), 8, 1.0, 1.0, 2.1),
      DomainError);
}

TEST_CASE("fit_s_rho: z^2 is feasible at (s, rho) = (1, 1)") {
  FiberPoly p = poly_z2();
  JuliaCloud cloud = julia_cloud(p, 16384, 40, 7, 1e-3);
  Rng rng(55);
  std::vector<std::pair<Cplx, int>> samples;
  while (samples.size() < 200) {
    Cplx z = rng.in_disk(2.0);
    int n = 1 + static_cast<int>(rng.below(10));
    Cplx w = z;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      w = p.eval(w);
      if (std::abs(w) >= 2.1) ok = false;
    }
    if (!ok) continue;
    if (dist_to_julia(cloud, z) <= 1e-2) continue;
    if (dist_to_julia(cloud, w) <= 1e-2) continue;
    samples.emplace_back(z, n);
  }
  SRhoFit fit = fit_s_rho(p, cloud, samples);
  CHECK(fit.rho == 1.0);
  CHECK(fit.s <= 1.0 + 1e-6);

  // re-verification passes on its own input
  for (const auto& [z, n] : samples) {
    BackwardCheck chk =
        check_backward_contraction(p, cloud, z, n, fit.s, fit.rho, 2.1);
    CHECK(chk.holds);
  }
}

TEST_CASE("fit_s_rho: n = 0 degenerate sample, both sign cases") {
  FiberPoly p = poly_z2();
  JuliaCloud cloud = julia_cloud(p, 8192, 40, 7, 1e-3);
  // d < 1 region: constraint log d <= rho log d holds at rho = 1
  SRhoFit inside = fit_s_rho(p, cloud, {{Cplx(0.5, 0), 0}});
  CHECK(inside.s == 1.0);
  // d > 1 region (z = 3.5, d = 2.5): log d > 0 so any rho <= 1 works too
  SRhoFit outside = fit_s_rho(p, cloud, {{Cplx(3.5, 0), 0}});
  CHECK(outside.s == 1.0);
}

TEST_CASE("fit_s_rho on the Chebyshev map returns finite constants") {
  FiberPoly p = poly_cheb();
  JuliaCloud cloud = julia_cloud(p, 16384, 40, 9, 1e-3);
  Rng rng(77);
  std::vector<std::pair<Cplx, int>> samples;
  int tries = 0;
  while (samples.size() < 150 && ++tries < 100000) {
    Cplx z(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
    int n = 1 + static_cast<int>(rng.below(15));
    Cplx w = z;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      w = p.eval(w);
      if (std::abs(w) >= 2.5) ok = false;
    }
    if (!ok) continue;
    if (dist_to_julia(cloud, z) <= 1e-2) continue;
    if (dist_to_julia(cloud, w) <= 1e-2) continue;
    samples.emplace_back(z, n);
  }
  REQUIRE(samples.size() >= 100);
  SRhoFit fit = fit_s_rho(p, cloud, samples);
  CHECK(std::isfinite(fit.s));
  CHECK(fit.rho >= 1.0 / 32.0);
  for (const auto& [z, n] : samples)
    CHECK(check_backward_contraction(p, cloud, z, n, fit.s, fit.rho, 2.5).holds);
}
