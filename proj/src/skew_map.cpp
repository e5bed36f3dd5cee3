#include "skewlab/skew_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "skewlab/errors.hpp"
#include "skewlab/roots.hpp"

namespace skewlab {

namespace {

void require_in_domain(const SkewMap& map, Cplx t) {
  if (std::abs(t) > map.delta * (1.0 + 1e-12))
    throw DomainError("|t| = " + format_double(std::abs(t)) +
                      " exceeds the map domain radius delta = " +
                      format_double(map.delta));
}

}  // namespace

FiberPoly SkewMap::invariant_fiber_poly() const { return fiber_at(Cplx(0, 0)); }

FiberPoly SkewMap::fiber_at(Cplx t) const {
  std::vector<Cplx> c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i].eval(t);
  FiberPoly p(std::move(c));
  return p;
}

void SkewMap::validate() const {
  if (std::abs(lambda) >= 1.0 || std::abs(lambda) <= 0.0)
    throw ConfigError("lambda must satisfy 0 < |lambda| < 1, got " +
                      format_complex(lambda));
  if (delta <= 0.0) throw ConfigError("delta must be positive");
  if (a.empty() || a.size() < 2)
    throw ConfigError("fiber polynomial needs degree >= 1");
  if (std::abs(a.back().eval(Cplx(0, 0))) == 0.0)
    throw ConfigError("leading coefficient a_d(0) must be nonzero");
}

Cplx eval_fiber(const SkewMap& map, Cplx t, Cplx z) {
  require_in_domain(map, t);
  Cplx acc(0, 0);
  for (size_t i = map.a.size(); i-- > 0;) acc = acc * z + map.a[i].eval(t);
  return acc;
}

Point2 apply(const SkewMap& map, Point2 x) {
  return Point2{map.lambda * x.t, eval_fiber(map, x.t, x.z)};
}

Cplx dz(const SkewMap& map, Cplx t, Cplx z) {
  require_in_domain(map, t);
  Cplx acc(0, 0);
  for (size_t i = map.a.size(); i-- > 1;)
    acc = acc * z + map.a[i].eval(t) * static_cast<double>(i);
  return acc;
}

Cplx dt(const SkewMap& map, Cplx t, Cplx z) {
  require_in_domain(map, t);
  Cplx acc(0, 0);
  for (size_t i = map.a.size(); i-- > 0;)
    acc = acc * z + map.a[i].derivative().eval(t);
  return acc;
}

Orbit orbit(const SkewMap& map, Point2 x0, int n, double escape_radius) {
  Orbit out;
  out.budget = n;
  out.points.push_back(x0);
  for (int k = 0; k < n; ++k) {
    const Point2& cur = out.points.back();
    if (std::abs(cur.z) > escape_radius) {
      out.escaped_at = out.points.size() - 1;
      break;
    }
    out.points.push_back(apply(map, cur));
  }
  if (!out.escaped_at && std::abs(out.points.back().z) > escape_radius)
    out.escaped_at = out.points.size() - 1;
  return out;
}

double escape_radius(const SkewMap& map) {
  const int d = map.degree();
  const int n_samples = 256;

  // a_d must not vanish on the closed disk |t| <= delta; check its roots.
  const FiberPoly& lead = map.a.back();
  if (lead.degree() >= 1) {
    for (Cplx root : aberth_roots(lead)) {
      if (std::abs(root) <= map.delta)
        throw DomainError("a_d vanishes inside |t| <= delta at t = " +
                          format_complex(root));
    }
  } else if (std::abs(lead.coeffs[0]) == 0.0) {
    throw DomainError("a_d is identically zero");
  }

  // Modulus extrema of the holomorphic coefficients over |t| <= delta sit on
  // the boundary circle (no zeros inside for a_d, maximum principle for the
  // rest); sample it.
  std::vector<double> sup(map.a.size(), 0.0);
  double inf_lead = std::abs(lead.eval(Cplx(map.delta, 0)));
  for (int s = 0; s < n_samples; ++s) {
    double ang = 2.0 * M_PI * s / n_samples;
    Cplx t = map.delta * Cplx(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < map.a.size(); ++i)
      sup[i] = std::max(sup[i], std::abs(map.a[i].eval(t)));
    inf_lead = std::min(inf_lead, std::abs(lead.eval(t)));
  }

  auto certified = [&](double R) {
    double lhs = inf_lead;
    for (int i = 0; i < d; ++i) lhs = lhs * R;  // inf|a_d| R^d
    double tail = 0.0;
    for (int i = d - 1; i >= 0; --i) tail = tail * R + sup[i];
    return lhs - tail >= 2.0 * R;
  };

  // Smallest 1.05^k that passes; grid anchored at 1.
  int k = 0;
  if (certified(1.0)) {
    while (k > -600 && certified(std::pow(1.05, k - 1))) --k;
  } else {
    while (k < 600 && !certified(std::pow(1.05, k + 1))) ++k;
    ++k;
  }
  if (k >= 600 || k <= -600)
    throw NonConvergence("escape_radius: geometric grid search ran away");
  return std::pow(1.05, k);
}

TSeries koenigs_linearize(const FiberPoly& g, Cplx t0, int order) {
  if (order < 1) throw DomainError("koenigs_linearize: order must be >= 1");

  // Newton polish of the supplied fixed point.
  FiberPoly fixed_eq = g.minus_identity();
  t0 = newton_polish(fixed_eq, t0, 50);
  if (std::abs(g.eval(t0) - t0) > 1e-12 * (1.0 + std::abs(t0)))
    throw DomainError("koenigs_linearize: t0 is not a fixed point of g");

  Cplx mu = g.derivative().eval(t0);
  double m = std::abs(mu);
  if (m <= 1e-6 || m >= 1.0 - 1e-6)
    throw ResonanceError("koenigs_linearize: |g'(t0)| = " + format_double(m) +
                         " outside (1e-6, 1 - 1e-6)");

  // Recenter: gt(t) = g(t0 + t) - t0, a polynomial with gt(0) = 0 (Taylor
  // shift by Horner).
  std::vector<Cplx> shifted = g.coeffs;
  for (size_t pass = 0; pass + 1 < shifted.size(); ++pass)
    for (size_t i = shifted.size() - 1; i >= pass + 1; --i)
      shifted[i - 1] += shifted[i] * t0;
  shifted[0] -= t0;
  TSeries gt(shifted, 1.0);
  gt.coeffs[0] = Cplx(0, 0);  // exact by construction; kill rounding residue

  // Solve phi(gt(t)) = mu phi(t) order by order, phi = t + c2 t^2 + ...
  std::vector<Cplx> phi_c(order + 1, Cplx(0, 0));
  phi_c[1] = Cplx(1, 0);
  std::vector<Cplx> mu_pow(order + 1);
  mu_pow[0] = Cplx(1, 0);
  for (int k = 1; k <= order; ++k) mu_pow[k] = mu_pow[k - 1] * mu;
  for (int k = 2; k <= order; ++k) {
    TSeries partial(std::vector<Cplx>(phi_c.begin(), phi_c.begin() + k), 1.0);
    Cplx g_k = ts_compose(partial, gt, k).at(k);
    phi_c[k] = g_k / (mu - mu_pow[k]);
  }
  TSeries phi(phi_c, 0.0);

  // Shrink the certified radius until the functional-equation residual on
  // |t| = radius/2 is below 1e-10 (and gt keeps the circle inside the
  // series' own disk).
  double rho = 1.0;
  for (int halving = 0; halving < 200; ++halving) {
    double worst = 0.0;
    bool inside = true;
    for (int s = 0; s < 128 && inside; ++s) {
      double ang = 2.0 * M_PI * s / 128;
      Cplx t = 0.5 * rho * Cplx(std::cos(ang), std::sin(ang));
      Cplx gtv = gt.eval(t);
      if (std::abs(gtv) > rho) inside = false;
      worst = std::max(worst, std::abs(phi.eval(gtv) - mu * phi.eval(t)));
    }
    if (inside && worst <= 1e-10) {
      phi.radius = rho;
      return phi;
    }
    rho *= 0.5;
  }
  throw NonConvergence(
      "koenigs_linearize: residual target unreachable at this order");
}

namespace {

std::pair<std::string, std::string> split_key_value(const std::string& line,
                                                    int line_no) {
  size_t eq = line.find('=');
  if (eq == std::string::npos)
    throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace

SkewMap parse_map_description(const std::string& text) {
  SkewMap map;
  bool have_lambda = false, have_delta = false;
  int degree = -1;
  std::vector<std::pair<int, FiberPoly>> coeffs;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    auto [key, value] = split_key_value(line, line_no);
    try {
      if (key == "lambda") {
        map.lambda = parse_complex(value);
        have_lambda = true;
      } else if (key == "delta") {
        map.delta = parse_complex(value).real();
        have_delta = true;
      } else if (key == "degree") {
        degree = static_cast<int>(parse_complex(value).real());
      } else if (key.rfind("coeff[", 0) == 0 && key.back() == ']') {
        int idx = std::stoi(key.substr(6, key.size() - 7));
        std::vector<Cplx> c;
        std::istringstream vs(value);
        std::string item;
        while (std::getline(vs, item, ','))
          if (item.find_first_not_of(" \t") != std::string::npos)
            c.push_back(parse_complex(item));
        if (c.empty()) c.push_back(Cplx(0, 0));
        coeffs.emplace_back(idx, FiberPoly(std::move(c)));
      } else {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (!have_lambda) throw ConfigError("missing 'lambda'");
  if (!have_delta) throw ConfigError("missing 'delta'");
  if (degree < 1) throw ConfigError("missing or invalid 'degree'");

  map.a.assign(degree + 1, FiberPoly({Cplx(0, 0)}));
  for (auto& [idx, poly] : coeffs) {
    if (idx < 0 || idx > degree)
      throw ConfigError("coeff index " + std::to_string(idx) +
                        " outside 0..degree");
    map.a[idx] = std::move(poly);
  }
  map.validate();
  return map;
}

SkewMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open map file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_map_description(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace skewlab
