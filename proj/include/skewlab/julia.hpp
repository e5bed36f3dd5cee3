#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"

namespace skewlab {

/// Backward-iteration point cloud for J(p) plus a uniform-grid nearest
/// neighbor index (cell size = resolution). Immutable once built;
/// concurrent distance queries need no locks.
class JuliaCloud {
 public:
  std::vector<Cplx> points;
  double resolution = 1e-3;  // eps_J, target one-sided Hausdorff gap
  uint64_t seed = 0;
  int generations = 0;

  /// Nearest cloud point distance (exact over the stored points).
  double distance(Cplx z) const;
  Cplx nearest(Cplx z) const;

  void build_index();

 private:
  double cell_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  int64_t nx_ = 0, ny_ = 0;
  std::vector<int64_t> cell_keys_;   // sorted, parallel to order_
  std::vector<uint32_t> order_;      // point indices grouped by cell
  int64_t key_of(int64_t cx, int64_t cy) const { return cx * ny_ + cy; }
};

enum class FixedKind {
  attracting,
  superattracting,
  repelling,
  parabolic_candidate,
  neutral_irrational,
};

const char* fixed_kind_name(FixedKind k);

struct FixedPointInfo {
  Cplx z_star;
  Cplx multiplier;
  FixedKind kind;
};

/// Distinct critical points of p, with the subset lying on J(p).
struct CritSet1D {
  std::vector<Cplx> all_crit;  // distinct roots of p'
  std::vector<Cplx> in_julia;  // those within tol of the cloud
  double tol = 0.0;

  int q() const { return static_cast<int>(in_julia.size()); }
};

enum class FatouClass { fatou, julia_adjacent, undecided };

/// Stochastic backward iteration from a repelling fixed point; keeps the
/// last generation, deduplicated on a grid of pitch resolution/4.
/// Deterministic given the seed (single-threaded by design).
JuliaCloud julia_cloud(const FiberPoly& p, int n_points, int generations,
                       uint64_t seed, double resolution = 1e-3);

double dist_to_julia(const JuliaCloud& cloud, Cplx z);

/// All deg(p) fixed points (with multiplicity) and their classification.
std::vector<FixedPointInfo> classify_fixed_points(const FiberPoly& p);

/// Trit membership test: `fatou` when the orbit escapes or enters the
/// 1e-3 ball of a listed (super)attracting fixed point within budget;
/// `julia_adjacent` when z is within 2 eps_J of the cloud; else undecided.
FatouClass in_fatou(const FiberPoly& p, const JuliaCloud& cloud, Cplx z,
                    int budget, const std::vector<FixedPointInfo>& attractors,
                    double escape_R);

CritSet1D crit_in_julia(const FiberPoly& p, const JuliaCloud& cloud, double tol);

/// CSV (header re,im) plus a .meta.json sidecar with seed/generations/eps.
void export_cloud(const JuliaCloud& cloud, const std::string& csv_path);
JuliaCloud import_cloud(const std::string& csv_path);

}  // namespace skewlab
