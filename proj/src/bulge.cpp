#include "skewlab/bulge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewlab/errors.hpp"

namespace skewlab {

namespace {

// Coefficient polynomials a_i(t) as TSeries (exact, unbounded radius).
TSeries coeff_series(const FiberPoly& a) {
  return TSeries(a.coeffs, std::numeric_limits<double>::infinity());
}

// f(t, phi(t)) truncated at `order` by Horner over the z-coefficients.
TSeries compose_fiber(const SkewMap& map, const TSeries& phi, int order) {
  TSeries acc = TSeries::constant(Cplx(0, 0), phi.radius);
  for (size_t i = map.a.size(); i-- > 0;) {
    acc = ts_mul(acc, phi, order);
    acc = ts_add(acc, coeff_series(map.a[i]).truncated(order));
  }
  return acc;
}

}  // namespace

HorizontalDisk make_disk(const TSeries& phi, double size) {
  if (size <= 0.0) throw DomainError("make_disk: size must be positive");
  HorizontalDisk d;
  d.series = phi;
  d.size = size;
  d.center_z = phi.at(0);
  d.samples.resize(HorizontalDisk::kRadii * HorizontalDisk::kAngles);
  for (int i = 0; i < HorizontalDisk::kRadii; ++i)
    for (int j = 0; j < HorizontalDisk::kAngles; ++j)
      d.samples[i * HorizontalDisk::kAngles + j] = phi.eval(d.grid_t(i, j));
  return d;
}

HorizontalDisk constant_disk(Cplx z, double size) {
  return make_disk(TSeries::constant(z, std::numeric_limits<double>::infinity()),
                   size);
}

StableManifold stable_manifold(const SkewMap& map, Cplx z_star, int order) {
  if (order < 1) throw DomainError("stable_manifold: order >= 1 required");
  FiberPoly p = map.invariant_fiber_poly();
  if (std::abs(p.eval(z_star) - z_star) > 1e-10 * (1.0 + std::abs(z_star)))
    throw DomainError("stable_manifold: z_star is not fixed by p");
  Cplx mu = p.derivative().eval(z_star);

  double gap = std::numeric_limits<double>::infinity();
  std::vector<Cplx> lambda_pow(order + 1);
  lambda_pow[0] = Cplx(1, 0);
  for (int k = 1; k <= order; ++k) {
    lambda_pow[k] = lambda_pow[k - 1] * map.lambda;
    gap = std::min(gap, std::abs(mu - lambda_pow[k]));
  }

  std::vector<Cplx> phi_c(order + 1, Cplx(0, 0));
  phi_c[0] = z_star;
  for (int k = 1; k <= order; ++k) {
    TSeries partial(std::vector<Cplx>(phi_c.begin(), phi_c.begin() + k),
                    std::numeric_limits<double>::infinity());
    Cplx g_k = compose_fiber(map, partial, k).at(k);
    Cplx denom = lambda_pow[k] - mu;
    if (std::abs(denom) < 1e-6) {
      if (std::abs(g_k) > 1e-250)
        throw ResonanceError("stable_manifold: resonance lambda^" +
                             std::to_string(k) + " ~ p'(z_star)");
      phi_c[k] = Cplx(0, 0);
    } else {
      phi_c[k] = g_k / denom;
    }
  }

  StableManifold out;
  out.order = order;
  out.nonresonance_gap = gap;
  TSeries phi(phi_c, map.delta);

  double size = map.delta;
  for (int halving = 0; halving < 200; ++halving) {
    double worst = 0.0;
    for (int s = 0; s < 256; ++s) {
      double ang = 2.0 * M_PI * s / 256;
      Cplx t = 0.5 * size * Cplx(std::cos(ang), std::sin(ang));
      worst = std::max(worst,
                       std::abs(eval_fiber(map, t, phi.eval(t)) -
                                phi.eval(map.lambda * t)));
    }
    if (std::isfinite(worst) && worst <= 1e-8) {
      out.residual = worst;
      phi.radius = size;
      out.series = phi;
      return out;
    }
    size *= 0.5;
  }
  throw NonConvergence("stable_manifold: residual stayed above 1e-8");
}

PullbackResult pullback_disk(const SkewMap& map, const HorizontalDisk& phi,
                             Cplx z0, double delta_try) {
  if (delta_try <= 0.0 || delta_try > map.delta)
    throw DomainError("pullback_disk: need 0 < delta_try <= map.delta");
  if (std::abs(map.lambda) * delta_try > phi.size * (1.0 + 1e-12))
    throw DomainError("pullback_disk: |lambda| delta_try exceeds the source size");
  if (std::abs(eval_fiber(map, Cplx(0, 0), z0) - phi.center_z) > 1e-9)
    throw DomainError("pullback_disk: f(0, z0) != phi(0)");

  PullbackResult out;
  if (std::abs(dz(map, Cplx(0, 0), z0)) < 1e-8) {
    out.status = PullbackStatus::critical_collision;
    out.fail_t = Cplx(0, 0);
    return out;
  }

  constexpr int kR = HorizontalDisk::kRadii;   // 64 radial steps
  constexpr int kA = HorizontalDisk::kAngles;  // 32 rays
  std::vector<Cplx> grid(kR * kA);
  for (int j = 0; j < kA; ++j) {
    double ang = 2.0 * M_PI * j / kA;
    Cplx dir(std::cos(ang), std::sin(ang));
    Cplx psi = z0;
    for (int i = 0; i < kR; ++i) {
      Cplx t = dir * (delta_try * (i + 1) / kR);
      Cplx target = phi.series.eval(map.lambda * t);
      bool converged = false;
      for (int it = 0; it < 50; ++it) {
        Cplx deriv = dz(map, t, psi);
        if (std::abs(deriv) < 1e-8) {
          out.status = PullbackStatus::critical_collision;
          out.fail_t = t;
          return out;
        }
        Cplx err = eval_fiber(map, t, psi) - target;
        if (std::abs(err) <= 1e-12 * (1.0 + std::abs(target))) {
          converged = true;
          break;
        }
        psi -= err / deriv;
      }
      if (!converged &&
          std::abs(eval_fiber(map, t, psi) - target) >
              1e-12 * (1.0 + std::abs(target))) {
        out.status = PullbackStatus::newton_divergence;
        out.fail_t = t;
        return out;
      }
      grid[i * kA + j] = psi;
    }
  }

  // Least-squares series of order 16 on the product grid: with 32 equally
  // spaced angles the monomial normal equations decouple per degree. The
  // fit runs in the scaled variable tau = t / delta_try (radii in (0, 1])
  // so deep pullback chains with tiny delta_try cannot underflow; orders
  // whose unscaling would leave the normal range are dropped (their true
  // coefficients are far below noise at that scale anyway).
  constexpr int kOrder = 16;
  std::vector<Cplx> c(kOrder + 1, Cplx(0, 0));
  c[0] = z0;
  double scale_pow = 1.0;
  for (int k = 1; k <= kOrder; ++k) {
    scale_pow *= delta_try;
    if (scale_pow < 1e-250) break;
    Cplx num(0, 0);
    double den = 0.0;
    for (int i = 0; i < kR; ++i) {
      double rho = static_cast<double>(i + 1) / kR;
      Cplx bk(0, 0);
      for (int j = 0; j < kA; ++j) {
        double ang = 2.0 * M_PI * j / kA;
        Cplx w(std::cos(k * ang), -std::sin(k * ang));
        bk += (grid[i * kA + j] - z0) * w;
      }
      bk /= static_cast<double>(kA);
      double rk = std::pow(rho, k);
      num += bk * rk;
      den += rk * rk;
    }
    c[k] = num / (den * scale_pow);
  }

  HorizontalDisk disk = make_disk(TSeries(c, delta_try), delta_try);
  double worst = 0.0;
  for (int i = 0; i < kR; ++i)
    for (int j = 0; j < kA; ++j) {
      Cplx t = disk.grid_t(i, j);
      Cplx psi = disk.samples[i * kA + j];
      worst = std::max(worst, std::abs(eval_fiber(map, t, psi) -
                                       phi.series.eval(map.lambda * t)));
    }
  out.residual = worst;
  if (!(worst <= 1e-9)) {
    out.status = PullbackStatus::fit_residual;
    out.fail_t = Cplx(0, 0);
    return out;
  }
  out.disk = std::move(disk);
  return out;
}

namespace {

enum class GridFate { attracted, escaped, undecided };

GridFate point_fate(const SkewMap& map, Point2 x, const FixedPointInfo* target,
                    double escape_R, int budget) {
  for (int k = 0; k <= budget; ++k) {
    if (std::abs(x.z) > escape_R) return GridFate::escaped;
    if (target && std::abs(x.z - target->z_star) <= 1e-3 &&
        std::abs(x.t) <= 1e-3)
      return GridFate::attracted;
    x = apply(map, x);
  }
  return GridFate::undecided;
}

}  // namespace

RMeasure measure_r(const SkewMap& map, const FiberPoly& p,
                   const JuliaCloud& cloud,
                   const std::vector<FixedPointInfo>& attractors, Cplx z,
                   double escape_R, int budget, int bisection_steps,
                   HorizontalDisk* accepted_disk) {
  RMeasure out;
  out.z = z;
  if (std::abs(z) >= escape_R)
    throw DomainError("measure_r: |z| must be < escape_R");
  if (in_fatou(p, cloud, z, budget, attractors, escape_R) != FatouClass::fatou)
    throw DomainError("measure_r: in_fatou(z) != fatou");

  // Route: follow the fiber orbit of z to an attractor neighborhood, or
  // detect escape. in_fatou == fatou guarantees one of the two.
  const FixedPointInfo* target = nullptr;
  std::vector<Cplx> chain{z};
  {
    Cplx w = z;
    for (int k = 0; k <= budget && !target; ++k) {
      if (std::abs(w) > escape_R) break;  // escape route, chain unused
      for (const auto& fp : attractors) {
        if (fp.kind != FixedKind::attracting &&
            fp.kind != FixedKind::superattracting)
          continue;
        if (std::abs(w - fp.z_star) <= 0.05) {
          target = &fp;
          break;
        }
      }
      if (!target) {
        w = p.eval(w);
        chain.push_back(w);
      }
    }
    if (!target) chain.clear();
  }
  const int m = target ? static_cast<int>(chain.size()) - 1 : 0;
  out.pull_chain_len = m;

  auto grid_fates_ok = [&](const HorizontalDisk& disk, int fwd_budget) {
    // Uniform class over the grid: all attracted (attractor route) or all
    // escaped (escape route); any undecided point rejects.
    GridFate want = target ? GridFate::attracted : GridFate::escaped;
    for (int i = 0; i < HorizontalDisk::kRadii; ++i)
      for (int j = 0; j < HorizontalDisk::kAngles; ++j) {
        Cplx zs = disk.samples[i * HorizontalDisk::kAngles + j];
        if (std::abs(zs) > escape_R) return false;  // leaves {|z| <= R}
        if (point_fate(map, {disk.grid_t(i, j), zs}, target, escape_R,
                       fwd_budget) != want)
          return false;
      }
    return true;
  };

  auto accept = [&](double r, HorizontalDisk* capture) {
    if (!target) {
      HorizontalDisk disk = constant_disk(z, r);
      if (!grid_fates_ok(disk, budget)) return false;
      if (capture) *capture = std::move(disk);
      return true;
    }
    double lam = std::abs(map.lambda);
    double base_size = r * std::pow(lam, m);
    if (!(base_size > 0.0)) return false;  // chain underflow
    HorizontalDisk disk = constant_disk(chain[m], base_size);
    for (int k = m - 1; k >= 0; --k) {
      PullbackResult res =
          pullback_disk(map, disk, chain[k], r * std::pow(lam, k));
      if (!res.ok()) return false;
      for (const Cplx& s : res.disk.samples)
        if (std::abs(s) > escape_R) return false;
      disk = std::move(res.disk);
    }
    if (!grid_fates_ok(disk, budget)) return false;
    if (capture) *capture = std::move(disk);
    return true;
  };

  if (accept(map.delta, accepted_disk)) {
    out.r_lo = map.delta;
    out.r_hi = map.delta * (1.0 + 1e-6);
    out.accepted = true;
    out.capped = true;
    return out;
  }
  double lo = 0.0, hi = map.delta;
  for (int step = 0; step < bisection_steps; ++step) {
    double mid = 0.5 * (lo + hi);
    if (accept(mid, nullptr))
      lo = mid;
    else
      hi = mid;
  }
  out.r_lo = lo;
  out.r_hi = hi;
  out.accepted = lo > 0.0;
  if (out.accepted && accepted_disk) accept(lo, accepted_disk);
  return out;
}

RadiusEnvelopeFit fit_radius_envelope(const std::vector<RMeasure>& measures,
                            const JuliaCloud& cloud) {
  RadiusEnvelopeFit fit;
  struct Pt {
    size_t idx;
    double d, r;
  };
  std::vector<Pt> pts;
  for (size_t i = 0; i < measures.size(); ++i) {
    if (!measures[i].accepted || !(measures[i].r_lo > 0.0)) {
      fit.rejected.push_back(i);
      continue;
    }
    pts.push_back({i, dist_to_julia(cloud, measures[i].z), measures[i].r_lo});
  }
  if (pts.size() < 50)
    throw DomainError("fit_radius_envelope: need >= 50 accepted measures, have " +
                      std::to_string(pts.size()));
  double d_min = pts[0].d, d_max = pts[0].d;
  for (const Pt& p : pts) {
    d_min = std::min(d_min, p.d);
    d_max = std::max(d_max, p.d);
  }
  if (d_max < 100.0 * d_min)
    throw DomainError("fit_radius_envelope: d(z,J) span below 2 decades");

  // Anchor at the smallest distance (ties: smallest r_lo), then take the
  // steepest line through it that stays below every point.
  size_t anchor = 0;
  for (size_t i = 1; i < pts.size(); ++i)
    if (pts[i].d < pts[anchor].d ||
        (pts[i].d == pts[anchor].d && pts[i].r < pts[anchor].r))
      anchor = i;
  const double xa = std::log(pts[anchor].d), ya = std::log(pts[anchor].r);
  double l = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i == anchor || pts[i].d <= pts[anchor].d) continue;
    l = std::min(l, (std::log(pts[i].r) - ya) / (std::log(pts[i].d) - xa));
  }
  if (!std::isfinite(l)) l = 0.0;
  l = std::max(l, 0.0);

  double k = std::numeric_limits<double>::infinity();
  for (const Pt& p : pts) k = std::min(k, p.r / std::pow(p.d, l));
  for (const Pt& p : pts)
    if (p.r / std::pow(p.d, l) <= k * (1.0 + 1e-12)) fit.binding.push_back(p.idx);

  fit.k = k;
  fit.l = l;
  return fit;
}

SchwarzReport check_schwarz(const HorizontalDisk& disk, double R) {
  SchwarzReport rep;
  for (int i = 0; i < HorizontalDisk::kRadii; ++i)
    for (int j = 0; j < HorizontalDisk::kAngles; ++j) {
      Cplx t = disk.grid_t(i, j);
      double lhs =
          std::abs(disk.samples[i * HorizontalDisk::kAngles + j] - disk.center_z);
      double rhs = 2.0 * R * std::abs(t) / disk.size + 1e-9;
      ++rep.checked;
      if (lhs > rhs) ++rep.violations;
      rep.worst_excess = std::max(rep.worst_excess, lhs - rhs);
    }
  return rep;
}

}  // namespace skewlab
