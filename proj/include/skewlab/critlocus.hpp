#pragma once

#include <string>
#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"
#include "skewlab/skew_map.hpp"

namespace skewlab {

/// One analytic branch-group of Crit(P) = {df/dz = 0} through a root c_k
/// of p' on the invariant fiber. Branches belonging to one component are
/// the cycles of the monodromy permutation of the fiber critical points
/// around t = 0; multiplicity is the cycle length.
struct CritComponent {
  Cplx c_k;
  int multiplicity = 1;
  /// (ray index, step index, t, z) samples, rays x steps, z continued in t.
  struct Sample {
    int ray;
    int step;
    Cplx t;
    Cplx z;
  };
  std::vector<Sample> samples;
};

struct CritConstants {
  double k1_hat = 0.0;
  double k_hat = 0.0;
  int d1 = 1;          // max multiplicity of critical points of p
  double delta1 = 0.0;
  Cplx k1_witness_t, k1_witness_z;  // arg-max samples
  Cplx k_witness_t, k_witness_z;
};

struct HolderViolation {
  Cplx t, z;
  double lhs, rhs;
  bool first_bound;  // true: |z-c| bound, false: |f(t,z)-p(c)| bound
};

struct HolderReport {
  std::vector<HolderViolation> violations;
  int samples_checked = 0;
};

/// All d-1 roots (with multiplicity) of df/dz(t, .), Newton polished.
std::vector<Cplx> fiber_critical_points(const SkewMap& map, Cplx t);

/// Continue the fiber critical points from t = 0 outward along n_rays
/// rays with n_steps geometric radius steps (up to delta1), matching roots
/// between consecutive steps by nearest neighbor with a gap-ratio guard
/// (ambiguous matches halve the step, up to 10 times). Components are
/// grouped by the monodromy permutation on the circle |t| = smallest ray
/// radius.
std::vector<CritComponent> continue_components(const SkewMap& map, double delta1,
                                               int n_rays, int n_steps,
                                               double angle_offset = 0.0);

CritConstants estimate_constants(const std::vector<CritComponent>& components,
                                 const SkewMap& map, const FiberPoly& p);

/// Re-checks both Hoelder bounds with constants scaled by (1 + 1e-9) on a
/// fresh sample set (rotated rays, different step count). Violations are
/// report content, not exceptions.
HolderReport verify_holder_bounds(const CritConstants& consts,
                                  const std::vector<CritComponent>& fresh,
                                  const SkewMap& map, const FiberPoly& p);

void export_components_csv(const std::vector<CritComponent>& components,
                           const std::string& path);
std::string constants_to_json(const CritConstants& c);

}  // namespace skewlab
