#pragma once

#include <vector>

#include "skewlab/complex.hpp"

namespace skewlab {

/// One-variable polynomial c_0 + c_1 z + ... + c_d z^d with complex
/// coefficients; the dynamics on the invariant fiber is one of these.
/// The leading coefficient must be nonzero (normalize() trims).
struct FiberPoly {
  std::vector<Cplx> coeffs;

  FiberPoly() = default;
  explicit FiberPoly(std::vector<Cplx> c) : coeffs(std::move(c)) { normalize(); }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  /// Horner evaluation, highest degree first (fixed order for determinism).
  Cplx eval(Cplx z) const {
    Cplx acc(0.0, 0.0);
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
    return acc;
  }

  FiberPoly derivative() const {
    std::vector<Cplx> d;
    for (size_t i = 1; i < coeffs.size(); ++i)
      d.push_back(coeffs[i] * static_cast<double>(i));
    if (d.empty()) d.push_back(Cplx(0.0, 0.0));
    return FiberPoly(std::move(d));
  }

  /// Drop trailing (numerically zero) leading coefficients.
  void normalize(double tol = 0.0) {
    while (coeffs.size() > 1 && std::abs(coeffs.back()) <= tol) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(Cplx(0.0, 0.0));
  }

  /// p(z) - z, used for fixed-point location.
  FiberPoly minus_identity() const {
    std::vector<Cplx> c = coeffs;
    if (c.size() < 2) c.resize(2, Cplx(0.0, 0.0));
    c[1] -= 1.0;
    return FiberPoly(std::move(c));
  }
};

}  // namespace skewlab
