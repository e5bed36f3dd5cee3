#pragma once

#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/julia.hpp"
#include "skewlab/skew_map.hpp"
#include "skewlab/tseries.hpp"

namespace skewlab {

/// Graph z = phi(t) over |t| < size, stored as a truncated series plus a
/// cached evaluation grid of 64 radii x 32 angles.
struct HorizontalDisk {
  static constexpr int kRadii = 64;
  static constexpr int kAngles = 32;

  Cplx center_z;
  TSeries series;  // radius >= size
  double size = 0.0;
  std::vector<Cplx> samples;  // kRadii * kAngles, samples[i*kAngles+j]

  Cplx grid_t(int i, int j) const {
    double r = size * (i + 1) / kRadii;
    double a = 2.0 * M_PI * j / kAngles;
    return Cplx(r * std::cos(a), r * std::sin(a));
  }
};

/// Build the cached grid from the series (size must be <= series.radius).
HorizontalDisk make_disk(const TSeries& phi, double size);
HorizontalDisk constant_disk(Cplx z, double size);

struct StableManifold {
  TSeries series;  // phi, phi(0) = z_star; series.radius is the working size
  int order = 0;
  double residual = 0.0;         // sup |f(t,phi(t)) - phi(lambda t)|, |t| = size/2
  double nonresonance_gap = 0.0; // min_{1<=k<=order} |p'(z_star) - lambda^k|
};

/// Invariant graph through a fiber fixed point: solves
/// f(t, phi(t)) = phi(lambda t) order by order, then shrinks the working
/// radius until the residual is <= 1e-8. A near-resonant divisor
/// (|lambda^k - mu| < 1e-6) aborts unless the corresponding right side is
/// identically zero (t-independent maps).
StableManifold stable_manifold(const SkewMap& map, Cplx z_star, int order);

enum class PullbackStatus { ok, critical_collision, newton_divergence, fit_residual };

struct PullbackResult {
  PullbackStatus status = PullbackStatus::ok;
  HorizontalDisk disk;
  Cplx fail_t;            // where the branch died (collision / divergence)
  double residual = 0.0;  // sup-grid |f(t, psi(t)) - phi(lambda t)|

  bool ok() const { return status == PullbackStatus::ok; }
};

/// Inverse-branch transport psi(t) = g_t(phi(lambda t)) by radial Newton
/// continuation (32 rays, 64 steps), with the branch normalized by
/// psi(0) = z0 where f(0, z0) = phi(0). The branch dies where
/// |df/dz| < 1e-8 (critical collision), mirroring the pull-back
/// obstruction. Accepted disks carry a fitted order-16 series whose
/// sup-grid residual is <= 1e-9.
PullbackResult pullback_disk(const SkewMap& map, const HorizontalDisk& phi,
                             Cplx z0, double delta_try);

struct RMeasure {
  Cplx z;
  double r_lo = 0.0;  // certified achievable size
  double r_hi = 0.0;  // first failing size (or the delta cap)
  int pull_chain_len = 0;
  bool accepted = false;
  bool capped = false;  // accepted at r = map.delta outright
};

/// Brackets the bulging radius r(z) by bisection over r in (0, delta].
/// A candidate r accepts when the horizontal disk of size r through z --
/// transported back from a tiny disk at the attractor end of the orbit of
/// z by a pullback chain, or a constant graph when the orbit escapes --
/// stays within |z| <= escape_R and its whole sample grid is certified
/// Fatou (uniformly attracted or uniformly escaping within budget).
/// Undecided grid points shrink r_hi.
RMeasure measure_r(const SkewMap& map, const FiberPoly& p,
                   const JuliaCloud& cloud,
                   const std::vector<FixedPointInfo>& attractors, Cplx z,
                   double escape_R, int budget, int bisection_steps = 20,
                   HorizontalDisk* accepted_disk = nullptr);

struct RadiusEnvelopeFit {
  double k = 0.0;
  double l = 0.0;
  std::vector<size_t> binding;   // measures pinning k
  std::vector<size_t> rejected;  // inputs dropped (not accepted / r_lo <= 0)
};

/// Lower-envelope fit of r_lo >= k d(z,J)^l: l is the largest slope of a
/// line through the smallest-distance point lying below every sample (in
/// log-log), clamped at 0; k is then maximized. Needs >= 50 accepted
/// measures spanning >= 2 decades of d.
RadiusEnvelopeFit fit_radius_envelope(const std::vector<RMeasure>& measures,
                            const JuliaCloud& cloud);

struct SchwarzReport {
  int checked = 0;
  int violations = 0;
  double worst_excess = 0.0;  // max of lhs - rhs over the grid
};

/// Checks |phi(t) - phi(0)| <= 2R|t|/size + 1e-9 on the cached grid.
/// Callers must only pass disks with sup |phi| <= R.
SchwarzReport check_schwarz(const HorizontalDisk& disk, double R);

}  // namespace skewlab
