#include "skewlab/dpu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skewlab/errors.hpp"

namespace skewlab {

double k_value(const KFunction& kf, Cplx z) {
  if (kf.crit_points.empty())
    throw DomainError("k_value: empty critical set");
  double best = -std::numeric_limits<double>::infinity();
  for (Cplx c : kf.crit_points) {
    double d = std::abs(z - c);
    double k = (d > 0.0) ? -std::log(d) : kf.cap;
    best = std::max(best, k);
  }
  return std::min(best, kf.cap);
}

double escape_radius_1d(const FiberPoly& p) {
  const int d = p.degree();
  if (d < 1 || std::abs(p.coeffs.back()) == 0.0)
    throw DomainError("escape_radius_1d: degenerate polynomial");
  auto certified = [&](double R) {
    double lhs = std::abs(p.coeffs.back());
    for (int i = 0; i < d; ++i) lhs *= R;
    double tail = 0.0;
    for (int i = d - 1; i >= 0; --i) tail = tail * R + std::abs(p.coeffs[i]);
    return lhs - tail >= 2.0 * R;
  };
  int k = 0;
  if (certified(1.0)) {
    while (k > -600 && certified(std::pow(1.05, k - 1))) --k;
  } else {
    while (k < 600 && !certified(std::pow(1.05, k + 1))) ++k;
    ++k;
  }
  if (k >= 600 || k <= -600)
    throw NonConvergence("escape_radius_1d: grid search ran away");
  return std::pow(1.05, k);
}

TrimReport trimmed_orbit_sum(const FiberPoly& p, const KFunction& kf, Cplx z0,
                             int n, double freeze_radius) {
  const int q = static_cast<int>(kf.crit_points.size());
  if (q < 1) throw DomainError("trimmed_orbit_sum: needs q >= 1");
  if (n < q) throw DomainError("trimmed_orbit_sum: needs n >= q");
  if (freeze_radius <= 0.0) freeze_radius = escape_radius_1d(p);

  TrimReport rep;
  rep.n = n;
  Cplx z = z0;
  for (int j = 0; j <= n; ++j) {
    rep.k_values.push_back(k_value(kf, z));
    if (std::abs(z) <= freeze_radius) z = p.eval(z);
  }

  std::vector<int> idx(rep.k_values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (rep.k_values[a] != rep.k_values[b])
      return rep.k_values[a] > rep.k_values[b];
    return a < b;
  });
  rep.trimmed_indices.assign(idx.begin(), idx.begin() + q);
  std::sort(rep.trimmed_indices.begin(), rep.trimmed_indices.end());

  // Sum the kept values in index order (not total minus removed), so the
  // result is bit-identical whenever the kept values are.
  std::vector<bool> removed(rep.k_values.size(), false);
  for (int i : rep.trimmed_indices) removed[i] = true;
  double sum = 0.0;
  for (size_t i = 0; i < rep.k_values.size(); ++i)
    if (!removed[i]) sum += rep.k_values[i];
  rep.trimmed_sum = sum;
  rep.q_hat = rep.trimmed_sum / n;
  return rep;
}

QEstimate estimate_Q(const FiberPoly& p, const KFunction& kf,
                     const std::vector<Cplx>& seeds, int n) {
  QEstimate est;
  if (kf.crit_points.empty()) return est;  // vacuous for q = 0
  bool first = true;
  for (Cplx seed : seeds) {
    double full = trimmed_orbit_sum(p, kf, seed, n).q_hat;
    double half = trimmed_orbit_sum(p, kf, seed, n / 2).q_hat;
    if (first || full > est.q_hat) est.q_hat = full;
    if (first || half > est.q_hat_half) est.q_hat_half = half;
    first = false;
  }
  return est;
}

BackwardCheck check_backward_contraction(const FiberPoly& p,
                                         const JuliaCloud& cloud, Cplx z, int n,
                                         double s, double rho,
                                         double escape_R) {
  if (n < 0) throw DomainError("check_backward_contraction: n >= 0");
  if (s < 1.0 || rho <= 0.0 || rho > 1.0)
    throw DomainError("check_backward_contraction: need s >= 1, 0 < rho <= 1");
  Cplx w = z;
  for (int j = 0; j < n; ++j) w = p.eval(w);
  if (std::abs(w) >= escape_R)
    throw DomainError("check_backward_contraction: |p^n(z)| = " +
                      format_double(std::abs(w)) +
                      " violates the |p^n(z)| < R precondition");

  BackwardCheck out;
  out.lhs = dist_to_julia(cloud, z);
  out.rhs = std::pow(s, n) * std::pow(dist_to_julia(cloud, w), rho);
  out.holds = out.lhs - 4.0 * cloud.resolution <= out.rhs;
  return out;
}

SRhoFit fit_s_rho(const FiberPoly& p, const JuliaCloud& cloud,
                  const std::vector<std::pair<Cplx, int>>& samples) {
  if (samples.empty()) throw DomainError("fit_s_rho: no samples");

  struct Entry {
    Cplx z;
    int n;
    double log_d0, log_dn;
  };
  std::vector<Entry> entries;
  for (const auto& [z, n] : samples) {
    Cplx w = z;
    for (int j = 0; j < n; ++j) w = p.eval(w);
    double dn = dist_to_julia(cloud, w);
    if (dn <= 4.0 * cloud.resolution)
      throw DomainError("fit_s_rho: sample with d(p^n z, J) <= 4 eps_J");
    entries.push_back({z, n, std::log(dist_to_julia(cloud, z)), std::log(dn)});
  }

  bool any_feasible = false;
  SRhoFit best;
  Cplx worst_z;
  int worst_n = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();

  for (int k = 0; k <= 5; ++k) {
    double rho = std::pow(0.5, k);
    // n = 0 constraints do not involve s: log d <= rho log d.
    bool feasible = true;
    for (const Entry& e : entries) {
      if (e.n == 0 && e.log_d0 > rho * e.log_dn + 1e-12) {
        feasible = false;
        double gap = e.log_d0 - rho * e.log_dn;
        if (gap > worst_gap) {
          worst_gap = gap;
          worst_z = e.z;
          worst_n = e.n;
        }
        break;
      }
    }
    if (!feasible) continue;

    double log_s = 0.0;  // s >= 1
    Cplx pin_z(0, 0);
    int pin_n = 0;
    for (const Entry& e : entries) {
      if (e.n == 0) continue;
      double need = (e.log_d0 - rho * e.log_dn) / e.n;
      if (need > log_s) {
        log_s = need;
        pin_z = e.z;
        pin_n = e.n;
      }
    }
    double s = std::exp(log_s);
    if (!any_feasible || s < best.s) {
      best.s = s;
      best.rho = rho;
      best.worst_z = pin_z;
      best.worst_n = pin_n;
      any_feasible = true;
    }
  }
  if (!any_feasible)
    throw DomainError("fit_s_rho: infeasible (cloud error?); worst sample z = " +
                      format_complex(worst_z) + ", n = " +
                      std::to_string(worst_n));
  return best;
}

}  // namespace skewlab
