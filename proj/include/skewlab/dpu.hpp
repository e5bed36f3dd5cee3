#pragma once

#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"
#include "skewlab/julia.hpp"

namespace skewlab {

/// k(x) = max over c in C(p) of -log|x - c|, clipped at `cap` where the
/// distance underflows (the trimmed sums remove those visits anyway).
struct KFunction {
  std::vector<Cplx> crit_points;  // C(p) = Crit(p) on J(p)
  double cap = 50.0;
};

struct TrimReport {
  int n = 0;
  std::vector<double> k_values;       // k(x_j), j = 0..n
  std::vector<int> trimmed_indices;   // the q largest (value desc, index asc)
  double trimmed_sum = 0.0;           // sum of k_values minus trimmed ones
  double q_hat = 0.0;                 // trimmed_sum / n
};

struct QEstimate {
  double q_hat = 0.0;       // max over seeds at n
  double q_hat_half = 0.0;  // same at n/2, for the stability check
};

struct BackwardCheck {
  bool holds = false;
  double lhs = 0.0;  // d(z, J) cloud value
  double rhs = 0.0;  // s^n d(p^n z, J)^rho
};

struct SRhoFit {
  double s = 1.0;
  double rho = 1.0;
  Cplx worst_z;  // sample that pinned s
  int worst_n = 0;
};

double k_value(const KFunction& kf, Cplx z);

/// Certified 1D escape bound: |p(z)| >= 2|z| whenever |z| > B (coefficient
/// bound on a 1.05-geometric grid, as for the skew map).
double escape_radius_1d(const FiberPoly& p);

/// k along the p-orbit of z0 for j = 0..n with the q = |C(p)| largest
/// values trimmed (ties resolved by smaller index). Once the orbit passes
/// `freeze_radius` (default: escape_radius_1d(p)) it is held fixed: the
/// point has left the compact region where the orbit sums live, and the
/// spherical distance to the critical set saturates from there on.
TrimReport trimmed_orbit_sum(const FiberPoly& p, const KFunction& kf, Cplx z0,
                             int n, double freeze_radius = 0.0);

/// Max of q_hat(n) over the seeds; q = 0 is vacuous and yields zeros.
QEstimate estimate_Q(const FiberPoly& p, const KFunction& kf,
                     const std::vector<Cplx>& seeds, int n);

/// d(z, J) <= s^n d(p^n z, J)^rho with cloud distances, the left side
/// reduced by 4 eps_J so cloud error can only produce false FEASIBLE.
/// Throws DomainError when |p^n(z)| >= escape_R (precondition, reported
/// distinctly from a false inequality).
BackwardCheck check_backward_contraction(const FiberPoly& p,
                                         const JuliaCloud& cloud, Cplx z, int n,
                                         double s, double rho, double escape_R);

/// Smallest feasible s over the dyadic grid rho in {1, 1/2, ..., 1/32} of
///   log d(z,J) <= n log s + rho log d(p^n z, J)   (s >= 1).
/// Samples are (z, n) pairs; preconditions per check_backward_contraction
/// plus d(p^n z, J) > 4 eps_J.
SRhoFit fit_s_rho(const FiberPoly& p, const JuliaCloud& cloud,
                  const std::vector<std::pair<Cplx, int>>& samples);

}  // namespace skewlab
