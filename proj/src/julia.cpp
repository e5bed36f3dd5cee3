#include "skewlab/julia.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "skewlab/errors.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/roots.hpp"

namespace skewlab {

namespace {

// All preimages p^{-1}(w), deterministic order. Quadratics use the stable
// closed form, higher degrees go through Aberth.
std::vector<Cplx> preimages(const FiberPoly& p, Cplx w) {
  if (p.degree() == 2) {
    Cplx a = p.coeffs[2], b = p.coeffs[1], c = p.coeffs[0] - w;
    Cplx s = std::sqrt(b * b - 4.0 * a * c);
    Cplx u = (std::abs(b - s) > std::abs(b + s)) ? b - s : b + s;
    Cplx r1, r2;
    if (std::abs(u) == 0.0) {
      r1 = std::sqrt(-c / a);
      r2 = -r1;
    } else {
      r1 = -u / (2.0 * a);
      r2 = c / (a * r1);
    }
    if (r2.real() < r1.real() ||
        (r2.real() == r1.real() && r2.imag() < r1.imag()))
      std::swap(r1, r2);
    return {r1, r2};
  }
  FiberPoly shifted = p;
  shifted.coeffs[0] -= w;
  return aberth_roots(shifted);
}

}  // namespace

const char* fixed_kind_name(FixedKind k) {
  switch (k) {
    case FixedKind::attracting: return "attracting";
    case FixedKind::superattracting: return "superattracting";
    case FixedKind::repelling: return "repelling";
    case FixedKind::parabolic_candidate: return "parabolic_candidate";
    case FixedKind::neutral_irrational: return "neutral_irrational";
  }
  return "?";
}

void JuliaCloud::build_index() {
  if (points.empty()) throw DomainError("JuliaCloud: empty point set");
  cell_ = resolution;
  double x1 = points[0].real(), y1 = points[0].imag();
  x0_ = x1;
  y0_ = y1;
  for (const Cplx& p : points) {
    x0_ = std::min(x0_, p.real());
    y0_ = std::min(y0_, p.imag());
    x1 = std::max(x1, p.real());
    y1 = std::max(y1, p.imag());
  }
  nx_ = static_cast<int64_t>((x1 - x0_) / cell_) + 2;
  ny_ = static_cast<int64_t>((y1 - y0_) / cell_) + 2;

  order_.resize(points.size());
  for (uint32_t i = 0; i < points.size(); ++i) order_[i] = i;
  auto cell_key = [&](uint32_t i) {
    int64_t cx = static_cast<int64_t>((points[i].real() - x0_) / cell_);
    int64_t cy = static_cast<int64_t>((points[i].imag() - y0_) / cell_);
    return key_of(cx, cy);
  };
  std::stable_sort(order_.begin(), order_.end(),
                   [&](uint32_t a, uint32_t b) { return cell_key(a) < cell_key(b); });
  cell_keys_.resize(points.size());
  for (size_t i = 0; i < order_.size(); ++i) cell_keys_[i] = cell_key(order_[i]);
}

Cplx JuliaCloud::nearest(Cplx z) const {
  if (cell_keys_.empty()) throw DomainError("JuliaCloud: index not built");
  const int64_t cx = static_cast<int64_t>(std::floor((z.real() - x0_) / cell_));
  const int64_t cy = static_cast<int64_t>(std::floor((z.imag() - y0_) / cell_));

  double best = std::numeric_limits<double>::infinity();
  Cplx best_pt = points[0];
  auto scan_cell = [&](int64_t x, int64_t y) {
    if (x < 0 || x >= nx_ || y < 0 || y >= ny_) return;
    int64_t key = key_of(x, y);
    auto lo = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), key);
    auto hi = std::upper_bound(cell_keys_.begin(), cell_keys_.end(), key);
    for (auto it = lo; it != hi; ++it) {
      const Cplx& p = points[order_[it - cell_keys_.begin()]];
      double d = std::abs(p - z);
      if (d < best) {
        best = d;
        best_pt = p;
      }
    }
  };

  // Expanding rings give the O(1) path for queries near the cloud; after
  // 48 empty-ish rings a flat scan over all points is cheaper than walking
  // more empty cells (deep-interior and far-field queries).
  const int64_t ring_cap = 48;
  for (int64_t k = 0; k <= ring_cap; ++k) {
    if (k == 0) {
      scan_cell(cx, cy);
    } else {
      for (int64_t x = cx - k; x <= cx + k; ++x) {
        scan_cell(x, cy - k);
        scan_cell(x, cy + k);
      }
      for (int64_t y = cy - k + 1; y <= cy + k - 1; ++y) {
        scan_cell(cx - k, y);
        scan_cell(cx + k, y);
      }
    }
    // Any point in ring k+1 or beyond is at least k*cell away.
    if (best <= static_cast<double>(k) * cell_) return best_pt;
  }
  for (const Cplx& p : points) {
    double d = std::abs(p - z);
    if (d < best) {
      best = d;
      best_pt = p;
    }
  }
  return best_pt;
}

double JuliaCloud::distance(Cplx z) const { return std::abs(nearest(z) - z); }

JuliaCloud julia_cloud(const FiberPoly& p, int n_points, int generations,
                       uint64_t seed, double resolution) {
  if (p.degree() < 2) throw DomainError("julia_cloud: degree >= 2 required");
  if (n_points < 1) throw DomainError("julia_cloud: n_points >= 1 required");

  auto fixed = classify_fixed_points(p);
  const FixedPointInfo* rep = nullptr;
  for (const auto& f : fixed)
    if (f.kind == FixedKind::repelling &&
        (!rep || std::abs(f.multiplier) > std::abs(rep->multiplier)))
      rep = &f;
  if (!rep) {
    std::ostringstream msg;
    msg << "julia_cloud: no repelling fixed point; found";
    for (const auto& f : fixed)
      msg << " {z=" << format_complex(f.z_star)
          << ", mu=" << format_complex(f.multiplier) << ", "
          << fixed_kind_name(f.kind) << "}";
    throw DomainError(msg.str());
  }

  Rng rng(seed);
  std::vector<Cplx> pop{rep->z_star};
  std::vector<Cplx> next;
  for (int gen = 0; gen < generations; ++gen) {
    next.clear();
    if (static_cast<int>(pop.size()) < n_points) {
      for (Cplx w : pop) {
        auto pre = preimages(p, w);
        next.insert(next.end(), pre.begin(), pre.end());
      }
      if (static_cast<int>(next.size()) > n_points) {
        // Random subsample down to the target population.
        for (size_t i = next.size(); i-- > 1;)
          std::swap(next[i], next[rng.below(i + 1)]);
        next.resize(n_points);
      }
    } else {
      next.reserve(pop.size());
      for (Cplx w : pop) {
        auto pre = preimages(p, w);
        next.push_back(pre[rng.below(pre.size())]);
      }
    }
    pop.swap(next);
  }

  // Deduplicate the last generation on a grid of pitch eps/4.
  const double pitch = resolution / 4.0;
  std::map<std::pair<int64_t, int64_t>, bool> seen;
  std::vector<Cplx> kept;
  kept.reserve(pop.size());
  for (Cplx z : pop) {
    std::pair<int64_t, int64_t> cell{
        static_cast<int64_t>(std::floor(z.real() / pitch)),
        static_cast<int64_t>(std::floor(z.imag() / pitch))};
    if (!seen.emplace(cell, true).second) continue;
    kept.push_back(z);
  }

  JuliaCloud cloud;
  cloud.points = std::move(kept);
  cloud.resolution = resolution;
  cloud.seed = seed;
  cloud.generations = generations;
  cloud.build_index();
  return cloud;
}

double dist_to_julia(const JuliaCloud& cloud, Cplx z) { return cloud.distance(z); }

std::vector<FixedPointInfo> classify_fixed_points(const FiberPoly& p) {
  if (p.degree() < 2)
    throw DomainError("classify_fixed_points: degree >= 2 required");
  FiberPoly eq = p.minus_identity();
  FiberPoly dp = p.derivative();
  std::vector<FixedPointInfo> out;
  for (Cplx root : aberth_roots(eq)) {
    Cplx z = newton_polish(eq, root, 50);
    Cplx mu = dp.eval(z);
    double m = std::abs(mu);
    FixedKind kind;
    if (m < 1e-10) {
      kind = FixedKind::superattracting;
    } else if (std::abs(m - 1.0) <= 1e-8) {
      kind = FixedKind::neutral_irrational;
      Cplx mk(1, 0);
      for (int k = 1; k <= 64; ++k) {
        mk *= mu;
        if (std::abs(mk - Cplx(1, 0)) <= 1e-6) {
          kind = FixedKind::parabolic_candidate;
          break;
        }
      }
    } else if (m < 1.0) {
      kind = FixedKind::attracting;
    } else {
      kind = FixedKind::repelling;
    }
    out.push_back({z, mu, kind});
  }
  return out;
}

FatouClass in_fatou(const FiberPoly& p, const JuliaCloud& cloud, Cplx z,
                    int budget, const std::vector<FixedPointInfo>& attractors,
                    double escape_R) {
  if (budget < 1) throw DomainError("in_fatou: budget >= 1 required");
  Cplx w = z;
  for (int k = 0; k <= budget; ++k) {
    if (std::abs(w) > escape_R) return FatouClass::fatou;
    for (const auto& fp : attractors) {
      if (fp.kind != FixedKind::attracting &&
          fp.kind != FixedKind::superattracting)
        continue;
      if (std::abs(w - fp.z_star) <= 1e-3) return FatouClass::fatou;
    }
    w = p.eval(w);
  }
  if (dist_to_julia(cloud, z) <= 2.0 * cloud.resolution)
    return FatouClass::julia_adjacent;
  return FatouClass::undecided;
}

CritSet1D crit_in_julia(const FiberPoly& p, const JuliaCloud& cloud, double tol) {
  if (tol < 2.0 * cloud.resolution)
    throw DomainError("crit_in_julia: tol must be >= 2 eps_J");
  CritSet1D out;
  out.tol = tol;
  FiberPoly dp = p.derivative();
  if (dp.degree() < 1 && std::abs(dp.coeffs[0]) == 0.0) return out;
  std::vector<Cplx> roots = dp.degree() >= 1 ? aberth_roots(dp) : std::vector<Cplx>{};
  for (const auto& [rep, mult] : cluster_roots(roots, 1e-8)) {
    (void)mult;
    out.all_crit.push_back(rep);
    if (dist_to_julia(cloud, rep) <= tol) out.in_julia.push_back(rep);
  }
  return out;
}

void export_cloud(const JuliaCloud& cloud, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + csv_path + "'");
  out << "re,im\r\n";
  for (const Cplx& p : cloud.points)
    out << format_double(p.real()) << "," << format_double(p.imag()) << "\r\n";

  nlohmann::json meta;
  meta["seed"] = cloud.seed;
  meta["generations"] = cloud.generations;
  meta["eps_j"] = cloud.resolution;
  meta["n_points"] = cloud.points.size();
  std::ofstream mout(csv_path + ".meta.json", std::ios::binary);
  mout << meta.dump(2) << "\n";
}

JuliaCloud import_cloud(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + csv_path + "'");
  std::ifstream min(csv_path + ".meta.json", std::ios::binary);
  if (!min) throw ConfigError("missing sidecar '" + csv_path + ".meta.json'");
  nlohmann::json meta = nlohmann::json::parse(min);

  JuliaCloud cloud;
  cloud.seed = meta.at("seed").get<uint64_t>();
  cloud.generations = meta.at("generations").get<int>();
  cloud.resolution = meta.at("eps_j").get<double>();

  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError("bad cloud row '" + line + "'");
    cloud.points.emplace_back(std::stod(line.substr(0, comma)),
                              std::stod(line.substr(comma + 1)));
  }
  cloud.build_index();
  return cloud;
}

}  // namespace skewlab
