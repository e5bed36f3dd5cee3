#pragma once

#include <vector>

#include "skewlab/complex.hpp"

namespace skewlab {

/// Truncated power series in t with a convergence-control radius: the
/// truncation is trusted only for |t| <= radius. Arithmetic keeps the
/// smaller of the operand orders.
struct TSeries {
  std::vector<Cplx> coeffs;  // coeffs[k] multiplies t^k
  double radius = 0.0;

  TSeries() = default;
  TSeries(std::vector<Cplx> c, double r) : coeffs(std::move(c)), radius(r) {
    if (coeffs.empty()) coeffs.push_back(Cplx(0.0, 0.0));
  }

  static TSeries constant(Cplx value, double r) { return TSeries({value}, r); }

  int order() const { return static_cast<int>(coeffs.size()) - 1; }

  Cplx at(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs.size())) ? coeffs[k] : Cplx(0, 0);
  }

  /// Horner evaluation of the truncation, highest order first.
  Cplx eval(Cplx t) const {
    Cplx acc(0.0, 0.0);
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
    return acc;
  }

  TSeries truncated(int n) const {
    std::vector<Cplx> c(coeffs.begin(),
                        coeffs.begin() + std::min<size_t>(coeffs.size(), n + 1));
    return TSeries(std::move(c), radius);
  }
};

TSeries ts_add(const TSeries& a, const TSeries& b);
TSeries ts_sub(const TSeries& a, const TSeries& b);
TSeries ts_scale(const TSeries& a, Cplx s);
/// Product truncated at `order` (defaults to min of operand orders).
TSeries ts_mul(const TSeries& a, const TSeries& b, int order = -1);
/// a(inner(t)) truncated at `order`; requires inner(0) contribution handled
/// by the caller when inner.at(0) != 0 (composition uses plain powers, so a
/// nonzero constant term is allowed but loses the truncation-order guarantee).
TSeries ts_compose(const TSeries& a, const TSeries& inner, int order);

}  // namespace skewlab
