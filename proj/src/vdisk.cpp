#include "skewlab/vdisk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewlab/critlocus.hpp"
#include "skewlab/errors.hpp"

namespace skewlab {

VerticalDisk make_vertical_disk(Cplx t0, Cplx center_z, double radius,
                                int n_boundary) {
  if (radius <= 0.0) throw DomainError("vertical disk radius must be positive");
  if (n_boundary < 8) throw DomainError("vertical disk needs >= 8 samples");
  VerticalDisk d;
  d.t0 = t0;
  d.center_z = center_z;
  d.radius = radius;
  d.boundary.resize(n_boundary);
  for (int k = 0; k < n_boundary; ++k) {
    double a = 2.0 * M_PI * k / n_boundary;
    d.boundary[k] = center_z + radius * Cplx(std::cos(a), std::sin(a));
  }
  return d;
}

std::vector<DiskImage> push_disk(const SkewMap& map, const VerticalDisk& disk,
                                 int n, double escape_R) {
  if (n < 1) throw DomainError("push_disk: n >= 1 required");
  std::vector<DiskImage> out;
  Cplx t = disk.t0;
  Cplx z = disk.center_z;
  std::vector<Cplx> boundary = disk.boundary;
  const double cap = 10.0 * escape_R;

  for (int step = 1; step <= n; ++step) {
    z = eval_fiber(map, t, z);
    bool over = false;
    for (auto& w : boundary) {
      w = eval_fiber(map, t, w);
      if (std::abs(w) > cap) over = true;
    }
    t *= map.lambda;  // repeated multiplication; t_n = lambda^n t0 bit-exact

    DiskImage img;
    img.n = step;
    img.t_n = t;
    img.z_n = z;
    img.boundary_images = boundary;
    img.truncated = over;
    out.push_back(std::move(img));
    if (over) break;
  }
  return out;
}

int boundary_winding(const DiskImage& image) {
  double total = 0.0;
  const auto& b = image.boundary_images;
  for (size_t k = 0; k < b.size(); ++k) {
    Cplx u = b[k] - image.z_n;
    Cplx v = b[(k + 1) % b.size()] - image.z_n;
    if (std::abs(u) == 0.0 || std::abs(v) == 0.0) return 0;  // curve hits z_n
    total += std::arg(v / u);
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

double inradius(const DiskImage& image) {
  if (boundary_winding(image) == 0)
    throw DomainError("inradius: boundary curve does not enclose z_n");
  double best = std::numeric_limits<double>::infinity();
  for (const Cplx& w : image.boundary_images)
    best = std::min(best, std::abs(w - image.z_n));
  return best;
}

RhoTrace rho_trace(const SkewMap& map, const VerticalDisk& disk, int n_max,
                   double lambda_abs, double escape_R) {
  RhoTrace trace;
  auto images = push_disk(map, disk, n_max, escape_R);
  double lam_pow = 1.0;
  for (const auto& img : images) {
    lam_pow *= lambda_abs;
    if (img.truncated) {
      trace.truncated = true;
      break;
    }
    if (boundary_winding(img) == 0) {
      trace.truncated = true;
      break;
    }
    double rho = inradius(img);
    if (rho < 1e-300) {
      trace.truncated = true;
      break;
    }
    trace.rows.push_back({img.n, rho, lam_pow / rho});
  }
  if (static_cast<int>(images.size()) < n_max) trace.truncated = true;
  return trace;
}

namespace {

// inradius of the first image, or nullopt for a degenerate (winding 0) one.
std::optional<double> first_image_inradius(const SkewMap& map,
                                           const VerticalDisk& disk,
                                           double escape_R) {
  auto images = push_disk(map, disk, 1, escape_R);
  const DiskImage& img = images.front();
  if (img.truncated || boundary_winding(img) == 0) return std::nullopt;
  return inradius(img);
}

double disk_eta(const SkewMap& map, const VerticalDisk& disk) {
  double eta = std::numeric_limits<double>::infinity();
  for (Cplx c : fiber_critical_points(map, disk.t0))
    eta = std::min(eta, std::abs(disk.center_z - c) - disk.radius);
  return std::max(eta, 0.0);
}

}  // namespace

double calibrate_degree_bound(const SkewMap& map,
                              const std::vector<VerticalDisk>& calibration,
                              double escape_R) {
  const int d = map.degree();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& disk : calibration) {
    auto rho = first_image_inradius(map, disk, escape_R);
    if (!rho) continue;
    worst = std::min(worst, *rho / std::pow(disk.radius, d));
  }
  if (!std::isfinite(worst))
    throw DomainError("calibrate_degree_bound: no usable calibration disks");
  return 0.5 * worst;
}

BoundReport check_degree_bound(const SkewMap& map,
                               const std::vector<VerticalDisk>& samples,
                               double c_fit, double escape_R) {
  const int d = map.degree();
  BoundReport rep;
  rep.c_fit = c_fit;
  for (const auto& disk : samples) {
    BoundSample s;
    s.disk = disk;
    auto rho = first_image_inradius(map, disk, escape_R);
    if (!rho) {
      s.skipped = true;
      ++rep.skipped;
      rep.samples.push_back(std::move(s));
      continue;
    }
    s.inradius_1 = *rho;
    ++rep.checked;
    if (*rho < c_fit * std::pow(disk.radius, d))
      rep.violations.push_back(rep.samples.size());
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

double calibrate_koebe_bound(const SkewMap& map,
                             const std::vector<VerticalDisk>& calibration,
                             double escape_R) {
  const int d = map.degree();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& disk : calibration) {
    double eta = disk_eta(map, disk);
    if (eta <= 1e-6) continue;
    auto rho = first_image_inradius(map, disk, escape_R);
    if (!rho) continue;
    worst = std::min(worst, *rho / (std::pow(eta, 2 * d - 2) * disk.radius));
  }
  if (!std::isfinite(worst))
    throw DomainError("calibrate_koebe_bound: no usable calibration disks");
  return 0.5 * worst;
}

BoundReport check_koebe_bound(const SkewMap& map,
                              const std::vector<VerticalDisk>& samples,
                              double c_fit, double escape_R) {
  const int d = map.degree();
  BoundReport rep;
  rep.c_fit = c_fit;
  for (const auto& disk : samples) {
    BoundSample s;
    s.disk = disk;
    s.eta = disk_eta(map, disk);
    if (s.eta <= 1e-6) {
      s.skipped = true;
      ++rep.skipped;
      rep.samples.push_back(std::move(s));
      continue;
    }
    auto rho = first_image_inradius(map, disk, escape_R);
    if (!rho) {
      s.skipped = true;
      ++rep.skipped;
      rep.samples.push_back(std::move(s));
      continue;
    }
    s.inradius_1 = *rho;
    ++rep.checked;
    if (*rho < c_fit * std::pow(s.eta, 2 * d - 2) * disk.radius)
      rep.violations.push_back(rep.samples.size());
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

ShadowReport shadowing_check(const SkewMap& map, const VerticalDisk& disk,
                             int n, int m, double lambda3, double escape_R) {
  if (n < 0 || m < 0) throw DomainError("shadowing_check: n, m >= 0");
  const double l3_pow = std::pow(lambda3, n + 1);
  if (disk.radius > l3_pow * (1.0 + 1e-12))
    throw DomainError("shadowing_check: disk radius exceeds lambda3^{n+1}");
  if (std::abs(disk.t0) > std::pow(std::abs(map.lambda), n + 1) * (1.0 + 1e-12))
    throw DomainError("shadowing_check: |t0| exceeds |lambda|^{n+1}");

  ShadowReport rep;
  // M from the derivative sup on the distinguished boundary of the working
  // box {|t| <= delta} x {|z| <= R} (maximum principle).
  double sup_d = 0.0;
  for (int i = 0; i < 64; ++i) {
    double at = 2.0 * M_PI * i / 64;
    Cplx t = map.delta * Cplx(std::cos(at), std::sin(at));
    for (int j = 0; j < 64; ++j) {
      double az = 2.0 * M_PI * j / 64;
      Cplx z = escape_R * Cplx(std::cos(az), std::sin(az));
      sup_d = std::max(sup_d, std::abs(dt(map, t, z)));
      sup_d = std::max(sup_d, std::abs(dz(map, t, z)));
    }
  }
  rep.m_const = 2.0 * sup_d;

  FiberPoly p = map.invariant_fiber_poly();
  std::vector<Cplx> p_track(m + 1);
  p_track[0] = disk.center_z;
  for (int k = 1; k <= m; ++k) {
    p_track[k] = p.eval(p_track[k - 1]);
    if (std::abs(p_track[k - 1]) > escape_R) rep.admissible = false;
  }
  if (std::abs(p_track[m]) > escape_R) rep.admissible = false;

  // Pre-flight: every boundary track must stay inside the box where the
  // derivative bound M was taken.
  for (const Cplx& w0 : disk.boundary) {
    Point2 x{disk.t0, w0};
    for (int k = 0; k <= m && rep.admissible; ++k) {
      if (std::abs(x.z) > escape_R) rep.admissible = false;
      if (k < m) x = apply(map, x);
    }
    if (!rep.admissible) return rep;
  }

  for (const Cplx& w0 : disk.boundary) {
    Point2 x{disk.t0, w0};
    bool ok = true;
    for (int k = 1; k <= m; ++k) {
      x = apply(map, x);
      double bound = std::pow(rep.m_const, k) * l3_pow;
      double err = std::abs(x.z - p_track[k]);
      rep.worst_margin = std::max(rep.worst_margin, err / bound);
      if (err > bound) ok = false;
    }
    // m = 0: |w - z_n| <= radius <= lambda3^{n+1} holds by the precondition.
    ++rep.checked;
    if (!ok) ++rep.violations;
  }
  return rep;
}

double grid_inradius_oracle(const DiskImage& image, int grid_n) {
  const auto& curve = image.boundary_images;
  double x0 = curve[0].real(), x1 = x0, y0 = curve[0].imag(), y1 = y0;
  for (const Cplx& w : curve) {
    x0 = std::min(x0, w.real());
    x1 = std::max(x1, w.real());
    y0 = std::min(y0, w.imag());
    y1 = std::max(y1, w.imag());
  }
  const double hx = (x1 - x0) / (grid_n - 1), hy = (y1 - y0) / (grid_n - 1);

  auto inside = [&](Cplx q) {
    // even-odd crossing rule on the sampled polygon
    bool in = false;
    for (size_t k = 0; k < curve.size(); ++k) {
      Cplx a = curve[k], b = curve[(k + 1) % curve.size()];
      if ((a.imag() > q.imag()) != (b.imag() > q.imag())) {
        double x_cross = a.real() + (q.imag() - a.imag()) /
                                        (b.imag() - a.imag()) *
                                        (b.real() - a.real());
        if (q.real() < x_cross) in = !in;
      }
    }
    return in;
  };

  // Scan grid points by increasing distance from z_n; the first outside
  // point pins the oracle inradius.
  struct GP {
    double d;
    Cplx q;
  };
  std::vector<GP> pts;
  pts.reserve(static_cast<size_t>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      Cplx q(x0 + hx * i, y0 + hy * j);
      pts.push_back({std::abs(q - image.z_n), q});
    }
  std::sort(pts.begin(), pts.end(),
            [](const GP& a, const GP& b) { return a.d < b.d; });
  for (const GP& g : pts)
    if (!inside(g.q)) return g.d;
  return pts.back().d;  // whole box inside (cannot happen for a closed curve)
}

}  // namespace skewlab
