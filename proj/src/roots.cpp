#include "skewlab/roots.hpp"

#include <algorithm>
#include <cmath>

#include "skewlab/errors.hpp"

namespace skewlab {

Cplx newton_polish(const FiberPoly& p, Cplx z0, int max_steps) {
  FiberPoly dp = p.derivative();
  Cplx best = z0;
  double best_res = std::abs(p.eval(z0));
  Cplx z = z0;
  for (int i = 0; i < max_steps; ++i) {
    Cplx d = dp.eval(z);
    if (std::abs(d) == 0.0) break;
    z -= p.eval(z) / d;
    double res = std::abs(p.eval(z));
    if (res < best_res) {
      best_res = res;
      best = z;
    }
    if (res == 0.0) break;
  }
  return best;
}

std::vector<Cplx> aberth_roots(const FiberPoly& p, int max_sweeps) {
  const int n = p.degree();
  if (n < 1) return {};
  if (n == 1) return {-p.coeffs[0] / p.coeffs[1]};

  // Cauchy-style bound for the initial circle.
  double lead = std::abs(p.coeffs.back());
  double big = 0.0;
  for (int i = 0; i < n; ++i) big = std::max(big, std::abs(p.coeffs[i]));
  double r0 = 1.0 + big / lead;

  std::vector<Cplx> z(n);
  for (int k = 0; k < n; ++k) {
    double a = 2.0 * M_PI * (k + 0.25) / n + 0.4;  // fixed phase offset
    z[k] = r0 * Cplx(std::cos(a), std::sin(a));
  }

  FiberPoly dp = p.derivative();
  double scale = 0.0;
  for (const auto& c : p.coeffs) scale = std::max(scale, std::abs(c));

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (int k = 0; k < n; ++k) {
      Cplx pv = p.eval(z[k]);
      Cplx dv = dp.eval(z[k]);
      Cplx ratio;
      if (std::abs(dv) > 0.0)
        ratio = pv / dv;
      else
        ratio = Cplx(1e-3, 1e-3);  // nudge off an exact critical point
      Cplx sum(0, 0);
      for (int j = 0; j < n; ++j)
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      Cplx denom = 1.0 - ratio * sum;
      Cplx step = (std::abs(denom) > 0.0) ? ratio / denom : ratio;
      z[k] -= step;
      max_step = std::max(max_step, std::abs(step));
    }
    if (max_step < 1e-14 * (1.0 + r0)) {
      for (auto& r : z) r = newton_polish(p, r);
      std::sort(z.begin(), z.end(), [](Cplx a, Cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      });
      return z;
    }
  }
  // Accept anyway if the residuals are already tiny relative to scale;
  // clustered (multiple) roots converge only linearly.
  double worst = 0.0;
  for (const auto& r : z) {
    double growth = std::pow(1.0 + std::abs(r), n);
    worst = std::max(worst, std::abs(p.eval(r)) / (scale * growth));
  }
  if (worst < 1e-11) {
    for (auto& r : z) r = newton_polish(p, r);
    std::sort(z.begin(), z.end(), [](Cplx a, Cplx b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return z;
  }
  throw NonConvergence("aberth_roots: no convergence after " +
                       std::to_string(max_sweeps) + " sweeps");
}

std::vector<std::pair<Cplx, int>> cluster_roots(const std::vector<Cplx>& roots,
                                                double tol) {
  std::vector<Cplx> sorted = roots;
  std::sort(sorted.begin(), sorted.end(), [](Cplx a, Cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<std::pair<Cplx, int>> out;
  std::vector<bool> used(sorted.size(), false);
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (used[i]) continue;
    Cplx sum = sorted[i];
    int count = 1;
    used[i] = true;
    for (size_t j = i + 1; j < sorted.size(); ++j) {
      if (!used[j] && std::abs(sorted[j] - sorted[i]) <= tol) {
        sum += sorted[j];
        ++count;
        used[j] = true;
      }
    }
    out.emplace_back(sum / static_cast<double>(count), count);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first.real() != b.first.real() ? a.first.real() < b.first.real()
                                            : a.first.imag() < b.first.imag();
  });
  return out;
}

}  // namespace skewlab
