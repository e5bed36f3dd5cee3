#include "skewlab/critlocus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "skewlab/errors.hpp"
#include "skewlab/roots.hpp"

namespace skewlab {

namespace {

// df/dz(t, .) as a polynomial in z.
FiberPoly dz_poly(const SkewMap& map, Cplx t) {
  std::vector<Cplx> c;
  for (size_t i = 1; i < map.a.size(); ++i)
    c.push_back(map.a[i].eval(t) * static_cast<double>(i));
  return FiberPoly(std::move(c));
}

struct MatchResult {
  std::vector<Cplx> matched;  // new position per branch
  bool ambiguous = false;
};

// Greedy global nearest-neighbor matching of the current roots onto the
// previous branch positions. Ambiguous when some branch's runner-up root
// is closer than 1.5x its matched root (gap ratio guard).
MatchResult match_roots(const std::vector<Cplx>& prev,
                        const std::vector<Cplx>& cur) {
  const size_t n = prev.size();
  struct Pair {
    double d;
    size_t b, r;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * n);
  for (size_t b = 0; b < n; ++b)
    for (size_t r = 0; r < n; ++r)
      pairs.push_back({std::abs(prev[b] - cur[r]), b, r});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.d != y.d) return x.d < y.d;
    if (x.b != y.b) return x.b < y.b;
    return x.r < y.r;
  });

  MatchResult out;
  out.matched.resize(n);
  std::vector<bool> b_used(n, false), r_used(n, false);
  std::vector<double> move(n, 0.0);
  size_t assigned = 0;
  for (const Pair& p : pairs) {
    if (b_used[p.b] || r_used[p.r]) continue;
    b_used[p.b] = true;
    r_used[p.r] = true;
    out.matched[p.b] = cur[p.r];
    move[p.b] = p.d;
    if (++assigned == n) break;
  }
  for (size_t b = 0; b < n; ++b) {
    double runner_up = std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < n; ++r) {
      double d = std::abs(prev[b] - cur[r]);
      if (cur[r] != out.matched[b]) runner_up = std::min(runner_up, d);
    }
    if (move[b] > 0.0 && runner_up < 1.5 * move[b]) {
      out.ambiguous = true;
      return out;
    }
  }
  return out;
}

// Continue branch positions from parameter t_from to t_to, bisecting the
// step geometrically in |t| (or linearly in angle) when matching is
// ambiguous. `param` maps a scalar u in [0,1] to t on the path.
void continue_path(const SkewMap& map, std::vector<Cplx>& positions,
                   const std::function<Cplx(double)>& param, double u0,
                   double u1, int depth) {
  Cplx t_to = param(u1);
  auto roots = fiber_critical_points(map, t_to);
  MatchResult m = match_roots(positions, roots);
  if (!m.ambiguous) {
    positions = std::move(m.matched);
    return;
  }
  if (depth >= 10)
    throw NonConvergence("continue_components: branch matching collision at t = " +
                         format_complex(t_to) + " after 10 step halvings");
  double mid = 0.5 * (u0 + u1);
  continue_path(map, positions, param, u0, mid, depth + 1);
  continue_path(map, positions, param, mid, u1, depth + 1);
}

}  // namespace

std::vector<Cplx> fiber_critical_points(const SkewMap& map, Cplx t) {
  FiberPoly dp = dz_poly(map, t);
  dp.normalize(0.0);
  if (dp.degree() < 1) {
    if (std::abs(dp.coeffs[0]) == 0.0)
      throw DomainError("fiber_critical_points: df/dz identically zero at t = " +
                        format_complex(t));
    return {};
  }
  auto roots = aberth_roots(dp);
  for (auto& z : roots) z = newton_polish(dp, z);
  return roots;
}

std::vector<CritComponent> continue_components(const SkewMap& map, double delta1,
                                               int n_rays, int n_steps,
                                               double angle_offset) {
  if (delta1 <= 0.0 || delta1 > map.delta)
    throw DomainError("continue_components: need 0 < delta1 <= map.delta");
  if (n_rays < 1 || n_steps < 2)
    throw DomainError("continue_components: need n_rays >= 1, n_steps >= 2");

  const int n_branches = map.degree() - 1;
  if (n_branches < 1) return {};

  // Clusters of p' roots on the invariant fiber.
  FiberPoly dp0 = dz_poly(map, Cplx(0, 0));
  dp0.normalize(0.0);
  std::vector<Cplx> roots0 = aberth_roots(dp0);
  for (auto& z : roots0) z = newton_polish(dp0, z);
  auto clusters = cluster_roots(roots0, 1e-8);

  // Geometric radius ladder ending exactly at delta1.
  const double r_min_frac = 1e-6;
  std::vector<double> radii(n_steps);
  for (int j = 0; j < n_steps; ++j)
    radii[j] = delta1 * std::pow(r_min_frac, double(n_steps - 1 - j) / (n_steps - 1));

  auto ray_angle = [&](int i) { return 2.0 * M_PI * i / n_rays + angle_offset; };

  // Initial positions per ray at the smallest radius: roots assigned to
  // clusters, slots within a cluster ordered by argument about the center.
  auto initial_positions = [&](double angle) {
    Cplx t0 = radii[0] * Cplx(std::cos(angle), std::sin(angle));
    auto roots = fiber_critical_points(map, t0);
    std::vector<int> cluster_of(roots.size());
    for (size_t r = 0; r < roots.size(); ++r) {
      int best = 0;
      double bd = std::abs(roots[r] - clusters[0].first);
      for (size_t c = 1; c < clusters.size(); ++c) {
        double d = std::abs(roots[r] - clusters[c].first);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      cluster_of[r] = best;
    }
    // slots: clusters in order, members by argument
    std::vector<Cplx> slots;
    std::vector<int> slot_cluster;
    for (size_t c = 0; c < clusters.size(); ++c) {
      std::vector<Cplx> members;
      for (size_t r = 0; r < roots.size(); ++r)
        if (cluster_of[r] == static_cast<int>(c)) members.push_back(roots[r]);
      std::sort(members.begin(), members.end(), [&](Cplx a, Cplx b) {
        return std::arg(a - clusters[c].first) < std::arg(b - clusters[c].first);
      });
      for (Cplx m : members) {
        slots.push_back(m);
        slot_cluster.push_back(static_cast<int>(c));
      }
    }
    return std::make_pair(slots, slot_cluster);
  };

  // Monodromy permutation of the branches around |t| = radii[0].
  auto [loop_start, loop_cluster] = initial_positions(ray_angle(0));
  const int n_loop = std::max(256, 16 * n_rays);
  std::vector<std::vector<Cplx>> loop_positions(n_loop + 1);
  loop_positions[0] = loop_start;
  {
    std::vector<Cplx> pos = loop_start;
    for (int s = 1; s <= n_loop; ++s) {
      double a0 = ray_angle(0) + 2.0 * M_PI * (s - 1) / n_loop;
      double a1 = ray_angle(0) + 2.0 * M_PI * s / n_loop;
      auto param = [&](double u) {
        double a = a0 + u * (a1 - a0);
        return radii[0] * Cplx(std::cos(a), std::sin(a));
      };
      continue_path(map, pos, param, 0.0, 1.0, 0);
      loop_positions[s] = pos;
    }
  }
  // Cycle decomposition: slot j returns to slot sigma(j).
  std::vector<int> sigma(loop_start.size());
  for (size_t j = 0; j < loop_positions[n_loop].size(); ++j) {
    int best = 0;
    double bd = std::abs(loop_positions[n_loop][j] - loop_start[0]);
    for (size_t k = 1; k < loop_start.size(); ++k) {
      double d = std::abs(loop_positions[n_loop][j] - loop_start[k]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    sigma[j] = best;
  }
  std::vector<int> component_of(loop_start.size(), -1);
  int n_components = 0;
  for (size_t j = 0; j < sigma.size(); ++j) {
    if (component_of[j] >= 0) continue;
    int id = n_components++;
    int cur = static_cast<int>(j);
    while (component_of[cur] < 0) {
      component_of[cur] = id;
      cur = sigma[cur];
    }
  }

  std::vector<CritComponent> components(n_components);
  std::vector<int> comp_size(n_components, 0);
  for (size_t j = 0; j < sigma.size(); ++j) {
    int id = component_of[j];
    comp_size[id]++;
    components[id].c_k = clusters[loop_cluster[j]].first;
  }
  for (int id = 0; id < n_components; ++id)
    components[id].multiplicity = comp_size[id];

  // Ray continuation; each ray's slots are tied to loop slots at its angle.
  for (int i = 0; i < n_rays; ++i) {
    auto [slots, slot_cluster_i] = initial_positions(ray_angle(i));
    (void)slot_cluster_i;
    // loop sample index at this ray's angle
    int s = i * (n_loop / n_rays);
    std::vector<int> slot_component(slots.size());
    std::vector<bool> taken(loop_positions[s].size(), false);
    for (size_t b = 0; b < slots.size(); ++b) {
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < loop_positions[s].size(); ++k) {
        if (taken[k]) continue;
        double d = std::abs(slots[b] - loop_positions[s][k]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(k);
        }
      }
      taken[best] = true;
      // Walk the loop slot back to angle 0: slot k at sample s descends from
      // start slot found by tracking membership; loop slots keep their index
      // (positions vector order is preserved by match), so index k at any s
      // refers to start slot k.
      slot_component[b] = component_of[best];
    }

    // t = 0 anchor samples.
    for (size_t b = 0; b < slots.size(); ++b) {
      components[slot_component[b]].samples.push_back(
          {i, -1, Cplx(0, 0), components[slot_component[b]].c_k});
    }

    std::vector<Cplx> pos = slots;
    for (size_t b = 0; b < pos.size(); ++b)
      components[slot_component[b]].samples.push_back({i, 0, radii[0] *
          Cplx(std::cos(ray_angle(i)), std::sin(ray_angle(i))), pos[b]});
    for (int j = 1; j < n_steps; ++j) {
      double angle = ray_angle(i);
      Cplx dir(std::cos(angle), std::sin(angle));
      double r0 = radii[j - 1], r1 = radii[j];
      auto param = [&](double u) {
        // geometric interpolation of the radius
        return dir * (r0 * std::pow(r1 / r0, u));
      };
      continue_path(map, pos, param, 0.0, 1.0, 0);
      for (size_t b = 0; b < pos.size(); ++b)
        components[slot_component[b]].samples.push_back(
            {i, j, dir * r1, pos[b]});
    }
  }
  return components;
}

CritConstants estimate_constants(const std::vector<CritComponent>& components,
                                 const SkewMap& map, const FiberPoly& p) {
  if (components.empty())
    throw DomainError("estimate_constants: no components");

  CritConstants out;
  // d1: max multiplicity among critical points of p (clusters of p' roots).
  FiberPoly dp = p.derivative();
  int d1 = 1;
  if (dp.degree() >= 1)
    for (const auto& [rep, mult] : cluster_roots(aberth_roots(dp), 1e-8)) {
      (void)rep;
      d1 = std::max(d1, mult);
    }
  out.d1 = d1;

  double delta1 = 0.0;
  bool have_sample = false;
  for (const auto& comp : components) {
    Cplx pc = p.eval(comp.c_k);
    for (const auto& s : comp.samples) {
      double at = std::abs(s.t);
      if (at == 0.0) continue;
      have_sample = true;
      delta1 = std::max(delta1, at);
      double denom = std::pow(at, 1.0 / d1);
      double r1 = std::abs(s.z - comp.c_k) / denom;
      if (r1 > out.k1_hat) {
        out.k1_hat = r1;
        out.k1_witness_t = s.t;
        out.k1_witness_z = s.z;
      }
      double r2 = std::abs(eval_fiber(map, s.t, s.z) - pc) / denom;
      if (r2 > out.k_hat) {
        out.k_hat = r2;
        out.k_witness_t = s.t;
        out.k_witness_z = s.z;
      }
    }
  }
  if (!have_sample)
    throw DomainError("estimate_constants: no t != 0 samples");
  out.delta1 = delta1;
  return out;
}

HolderReport verify_holder_bounds(const CritConstants& consts,
                                  const std::vector<CritComponent>& fresh,
                                  const SkewMap& map, const FiberPoly& p) {
  HolderReport report;
  const double slack = 1.0 + 1e-9;
  for (const auto& comp : fresh) {
    Cplx pc = p.eval(comp.c_k);
    for (const auto& s : comp.samples) {
      double at = std::abs(s.t);
      if (at == 0.0) continue;
      ++report.samples_checked;
      double hol = std::pow(at, 1.0 / consts.d1);
      double lhs1 = std::abs(s.z - comp.c_k);
      double rhs1 = consts.k1_hat * slack * hol;
      if (lhs1 > rhs1) report.violations.push_back({s.t, s.z, lhs1, rhs1, true});
      double lhs2 = std::abs(eval_fiber(map, s.t, s.z) - pc);
      double rhs2 = consts.k_hat * slack * hol;
      if (lhs2 > rhs2) report.violations.push_back({s.t, s.z, lhs2, rhs2, false});
    }
  }
  return report;
}

void export_components_csv(const std::vector<CritComponent>& components,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "ray,step,t_re,t_im,z_re,z_im\r\n";
  for (const auto& comp : components)
    for (const auto& s : comp.samples)
      out << s.ray << "," << s.step << "," << format_double(s.t.real()) << ","
          << format_double(s.t.imag()) << "," << format_double(s.z.real())
          << "," << format_double(s.z.imag()) << "\r\n";
}

std::string constants_to_json(const CritConstants& c) {
  nlohmann::json j;
  j["k1_hat"] = c.k1_hat;
  j["k_hat"] = c.k_hat;
  j["d1"] = c.d1;
  j["delta1"] = c.delta1;
  j["k1_witness"] = {{"t", format_complex(c.k1_witness_t)},
                     {"z", format_complex(c.k1_witness_z)}};
  j["k_witness"] = {{"t", format_complex(c.k_witness_t)},
                    {"z", format_complex(c.k_witness_z)}};
  return j.dump(2);
}

}  // namespace skewlab
