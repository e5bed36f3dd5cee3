#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"
#include "skewlab/tseries.hpp"

namespace skewlab {

struct Point2 {
  Cplx t;
  Cplx z;
};

/// Attracting local polynomial skew product (t, z) -> (lambda t, f(t, z))
/// with f(t, z) = sum a_i(t) z^i. Coefficients a_i are polynomials in t
/// (stored exactly), the map is only evaluated for |t| <= delta, and
/// |lambda| < 1 strictly. Immutable after construction; all operations on
/// it are pure and safe to call concurrently.
struct SkewMap {
  Cplx lambda;
  std::vector<FiberPoly> a;  // a[i] is the coefficient of z^i, polynomial in t
  double delta = 0.0;

  int degree() const { return static_cast<int>(a.size()) - 1; }

  /// p(z) = f(0, z), the dynamics on the invariant fiber.
  FiberPoly invariant_fiber_poly() const;

  /// f(t, .) as a one-variable polynomial in z.
  FiberPoly fiber_at(Cplx t) const;

  void validate() const;  // throws ConfigError on a broken description
};

struct Orbit {
  std::vector<Point2> points;
  std::optional<size_t> escaped_at;
  int budget = 0;
};

/// f(t, z) by Horner in z (coefficients evaluated by Horner in t),
/// highest degree first. Throws DomainError when |t| > map.delta.
Cplx eval_fiber(const SkewMap& map, Cplx t, Cplx z);

/// One application of the skew product.
Point2 apply(const SkewMap& map, Point2 x);

/// Exact partial derivatives of f (polynomial differentiation, not
/// finite differences).
Cplx dz(const SkewMap& map, Cplx t, Cplx z);
Cplx dt(const SkewMap& map, Cplx t, Cplx z);

/// Forward orbit of length n+1, stopping early (and recording the index)
/// once |z| exceeds escape_radius.
Orbit orbit(const SkewMap& map, Point2 x0, int n, double escape_radius);

/// A radius R with |f(t,z)| >= 2|z| whenever |t| <= delta, |z| > R,
/// certified through the coefficient bound
///   inf|a_d| R^d - sum_{i<d} sup|a_i| R^i >= 2R
/// with sup/inf of the coefficients taken on a 256-point circle |t| = delta.
/// Returns the smallest R = 1.05^k on the geometric grid; sufficient, not
/// minimal. Throws DomainError when a_d vanishes on |t| <= delta (the
/// message names the offending t).
double escape_radius(const SkewMap& map);

/// Koenigs coordinate at an attracting fixed point t0 of the one-variable
/// polynomial g: returns phi with phi(0) = 0, phi'(0) = 1 and
/// phi(g(t0 + t) - t0) = g'(t0) phi(t) up to the given order. The series
/// radius is shrunk until the functional-equation residual on |t| =
/// radius/2 drops below 1e-10. t0 is Newton-polished first.
TSeries koenigs_linearize(const FiberPoly& g, Cplx t0, int order);

/// Parse the key/value map description format:
///   lambda = a+bi
///   delta  = r
///   degree = d
///   coeff[i] = c0, c1, ...        (polynomial in t, complex entries)
/// Unknown keys are fatal; coeff[degree] must not vanish at t = 0.
SkewMap parse_map_description(const std::string& text);
SkewMap load_map_file(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::string& path);

}  // namespace skewlab
