#pragma once

#include <optional>
#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"
#include "skewlab/skew_map.hpp"

namespace skewlab {

/// Round disk inside the fiber {t = t0}, with 512 exact boundary samples.
struct VerticalDisk {
  static constexpr int kBoundary = 512;
  Cplx t0;
  Cplx center_z;
  double radius = 0.0;
  std::vector<Cplx> boundary;  // center_z + radius e^{2 pi i k / 512}
};

VerticalDisk make_vertical_disk(Cplx t0, Cplx center_z, double radius,
                                int n_boundary = VerticalDisk::kBoundary);

struct DiskImage {
  int n = 0;
  Cplx t_n;                          // lambda^n t0, by repeated multiplication
  Cplx z_n;                          // image of the center
  std::vector<Cplx> boundary_images; // exact forward images of the samples
  bool truncated = false;            // some boundary sample left |z| <= 10R
};

struct RhoTrace {
  struct Row {
    int n;
    double rho_n;
    double ratio;  // |lambda|^n / rho_n
  };
  std::vector<Row> rows;
  bool truncated = false;  // escape or winding/underflow stop before n_max
};

/// Forward images of the disk for n = 1..n; stops early (flagging
/// `truncated` on the last image) when a boundary sample passes
/// |z| > 10 escape_R.
std::vector<DiskImage> push_disk(const SkewMap& map, const VerticalDisk& disk,
                                 int n, double escape_R);

/// Min distance from z_n to the imaged boundary: a certified lower bound
/// for the inradius of pi_2(Delta_n) at z_n since the image-region boundary
/// is contained in the image of the boundary circle. Requires the sampled
/// image curve to wind around z_n (else DomainError: degenerate image).
double inradius(const DiskImage& image);

/// Winding number of the sampled boundary curve around z_n.
int boundary_winding(const DiskImage& image);

/// Rows (n, rho_n, |lambda|^n / rho_n) for n = 1..n_max; stops early on
/// escape, zero winding, or rho underflow (< 1e-300).
RhoTrace rho_trace(const SkewMap& map, const VerticalDisk& disk, int n_max,
                   double lambda_abs, double escape_R);

struct BoundSample {
  VerticalDisk disk;
  double inradius_1 = 0.0;  // inradius of the first image
  double eta = 0.0;         // distance of the disk to the fiber critical set
  bool skipped = false;     // eta <= 1e-6 (Koebe) or degenerate image
};

struct BoundReport {
  double c_fit = 0.0;
  std::vector<size_t> violations;  // indices into the checked samples
  std::vector<BoundSample> samples;
  int checked = 0;
  int skipped = 0;
};

/// Half the minimum observed inradius / r^d over the calibration set
/// (degenerate images skipped). d = map degree.
double calibrate_degree_bound(const SkewMap& map,
                              const std::vector<VerticalDisk>& calibration,
                              double escape_R);

/// Asserts inradius(P(disk)) >= c_fit r^d on each sample.
BoundReport check_degree_bound(const SkewMap& map,
                               const std::vector<VerticalDisk>& samples,
                               double c_fit, double escape_R);

/// Same protocol for the Koebe-flavored bound inradius >= c_fit eta^{2d-2} r,
/// with eta the distance from the disk to the fiber critical points at t0;
/// samples with eta <= 1e-6 are skipped with a note.
double calibrate_koebe_bound(const SkewMap& map,
                             const std::vector<VerticalDisk>& calibration,
                             double escape_R);
BoundReport check_koebe_bound(const SkewMap& map,
                              const std::vector<VerticalDisk>& samples,
                              double c_fit, double escape_R);

struct ShadowReport {
  double m_const = 0.0;     // 2 max(|df/dt|, |df/dz|) over the working box
  double worst_margin = 0.0;  // max over samples of |w_{n+m} - p^m(z_n)| / bound
  int violations = 0;
  int checked = 0;
  bool admissible = true;  // both tracks stayed inside {|z| <= R}
};

/// Two-track check of |w_{n+m} - p^m(z_n)| <= M^m lambda_3^{n+1} for the
/// boundary samples w of a disk interpreted as Delta_n (its t0 is t_n).
/// Preconditions: radius <= lambda_3^{n+1} and |t0| <= |lambda|^{n+1}.
/// The derivative bound M only holds inside the working box, so a disk
/// whose tracks leave {|z| <= R} mid-flight is reported inadmissible
/// (checked = 0) rather than checked against an invalid bound.
ShadowReport shadowing_check(const SkewMap& map, const VerticalDisk& disk,
                             int n, int m, double lambda3, double escape_R);

/// Point-in-polygon oracle: inradius of the image region measured on a
/// grid_n x grid_n membership grid over the boundary-image bounding box
/// (distance from z_n to the nearest grid point outside the sampled curve).
double grid_inradius_oracle(const DiskImage& image, int grid_n);

}  // namespace skewlab
