#include "skewlab/tseries.hpp"

#include <algorithm>

namespace skewlab {

TSeries ts_add(const TSeries& a, const TSeries& b) {
  std::vector<Cplx> c(std::max(a.coeffs.size(), b.coeffs.size()), Cplx(0, 0));
  for (size_t i = 0; i < c.size(); ++i) c[i] = a.at(int(i)) + b.at(int(i));
  return TSeries(std::move(c), std::min(a.radius, b.radius));
}

TSeries ts_sub(const TSeries& a, const TSeries& b) {
  std::vector<Cplx> c(std::max(a.coeffs.size(), b.coeffs.size()), Cplx(0, 0));
  for (size_t i = 0; i < c.size(); ++i) c[i] = a.at(int(i)) - b.at(int(i));
  return TSeries(std::move(c), std::min(a.radius, b.radius));
}

TSeries ts_scale(const TSeries& a, Cplx s) {
  std::vector<Cplx> c = a.coeffs;
  for (auto& v : c) v *= s;
  return TSeries(std::move(c), a.radius);
}

TSeries ts_mul(const TSeries& a, const TSeries& b, int order) {
  if (order < 0) order = std::max(a.order(), b.order());
  std::vector<Cplx> c(order + 1, Cplx(0, 0));
  for (int i = 0; i <= a.order() && i <= order; ++i) {
    if (a.coeffs[i] == Cplx(0, 0)) continue;
    for (int j = 0; j <= b.order() && i + j <= order; ++j)
      c[i + j] += a.coeffs[i] * b.coeffs[j];
  }
  return TSeries(std::move(c), std::min(a.radius, b.radius));
}

TSeries ts_compose(const TSeries& a, const TSeries& inner, int order) {
  // Horner over the outer coefficients: acc = acc*inner + a_k.
  TSeries acc = TSeries::constant(Cplx(0, 0), inner.radius);
  for (int k = a.order(); k >= 0; --k) {
    acc = ts_mul(acc, inner, order);
    acc.coeffs[0] += a.coeffs[k];
  }
  acc.radius = inner.radius;
  return acc;
}

}  // namespace skewlab
