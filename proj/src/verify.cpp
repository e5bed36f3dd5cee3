#include "skewlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "skewlab/bulge.hpp"
#include "skewlab/critlocus.hpp"
#include "skewlab/dpu.hpp"
#include "skewlab/errors.hpp"
#include "skewlab/julia.hpp"
#include "skewlab/parallel.hpp"
#include "skewlab/png.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/roots.hpp"
#include "skewlab/skew_map.hpp"
#include "skewlab/vdisk.hpp"

namespace skewlab {

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

struct Timer {
  double start = now_ms();
  double elapsed() const { return now_ms() - start; }
};

std::ofstream open_csv(const std::string& dir, const std::string& name,
                       const std::string& header) {
  std::ofstream out(dir + "/" + name, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + dir + "/" + name + "'");
  out << header << "\r\n";
  return out;
}

std::vector<FixedPointInfo> attracting_only(
    const std::vector<FixedPointInfo>& fixed) {
  std::vector<FixedPointInfo> out;
  for (const auto& f : fixed)
    if (f.kind == FixedKind::attracting || f.kind == FixedKind::superattracting)
      out.push_back(f);
  return out;
}

// Shared state across suites of one verify run.
struct RunContext {
  SkewMap map;
  FiberPoly p;
  double escape_R = 0.0;
  JuliaCloud cloud;
  std::vector<FixedPointInfo> fixed;
  std::vector<FixedPointInfo> attractors;
  CritSet1D crit;
  double delta1 = 0.0, delta2 = 0.0, crit_tol = 0.0;
};

// ---------------------------------------------------------------- julia ---

SuiteResult run_julia_suite(const RunConfig& cfg, RunContext& ctx) {
  Timer timer;
  SuiteResult res;

  ctx.cloud = julia_cloud(ctx.p, cfg.n_points, cfg.generations, cfg.seed,
                          cfg.eps_j);
  export_cloud(ctx.cloud, cfg.out_dir + "/julia_cloud.csv");
  res.stats["n_points"] = static_cast<double>(ctx.cloud.points.size());
  res.stats["eps_j"] = ctx.cloud.resolution;

  // Forward invariance: p(cloud) stays within 2 eps_J of the cloud.
  const size_t stride = std::max<size_t>(1, ctx.cloud.points.size() / 2000);
  for (size_t i = 0; i < ctx.cloud.points.size(); i += stride) {
    ++res.checks;
    if (dist_to_julia(ctx.cloud, ctx.p.eval(ctx.cloud.points[i])) >
        2.0 * ctx.cloud.resolution)
      ++res.violations;
  }

  // Distance triangle consistency on random pairs.
  Rng rng(cfg.seed + 11);
  double box = 0.0;
  for (const Cplx& w : ctx.cloud.points) box = std::max(box, std::abs(w));
  for (int i = 0; i < 500; ++i) {
    Cplx z1 = rng.in_disk(box + 1.0), z2 = rng.in_disk(box + 1.0);
    ++res.checks;
    if (std::abs(dist_to_julia(ctx.cloud, z1) - dist_to_julia(ctx.cloud, z2)) >
        std::abs(z1 - z2) + 4.0 * ctx.cloud.resolution)
      ++res.violations;
  }

  // Fixed points: full count and root-product identity.
  ctx.fixed = classify_fixed_points(ctx.p);
  ctx.attractors = attracting_only(ctx.fixed);
  ++res.checks;
  if (static_cast<int>(ctx.fixed.size()) != ctx.p.degree()) ++res.violations;
  {
    FiberPoly eq = ctx.p.minus_identity();
    Cplx prod(1, 0);
    for (const auto& f : ctx.fixed) prod *= f.z_star;
    Cplx expected = eq.coeffs.front() / eq.coeffs.back();
    if (ctx.p.degree() % 2) expected = -expected;
    ++res.checks;
    if (std::abs(prod - expected) > 1e-8 * (1.0 + std::abs(expected)))
      ++res.violations;
  }

  ctx.crit = crit_in_julia(ctx.p, ctx.cloud, ctx.crit_tol);
  res.stats["q"] = ctx.crit.q();

  // Fixed point table goes into the notes for auditing.
  for (const auto& f : ctx.fixed)
    res.notes.push_back("fixed z=" + format_complex(f.z_star) + " mu=" +
                        format_complex(f.multiplier) + " " +
                        fixed_kind_name(f.kind));

  res.wall_time_ms = timer.elapsed();
  return res;
}

// ----------------------------------------------------------------- crit ---

SuiteResult run_crit_suite(const RunConfig& cfg, RunContext& ctx) {
  Timer timer;
  SuiteResult res;
  if (ctx.map.degree() < 2) {
    ++res.skipped;
    res.notes.push_back("degree 1 fiber: no critical locus");
    res.wall_time_ms = timer.elapsed();
    return res;
  }

  const int n_rays = 16, n_steps = 48;
  auto set_a = continue_components(ctx.map, ctx.delta1, n_rays, n_steps, 0.0);
  export_components_csv(set_a, cfg.out_dir + "/crit_components.csv");
  CritConstants consts = estimate_constants(set_a, ctx.map, ctx.p);
  res.stats["k1_hat"] = consts.k1_hat;
  res.stats["k_hat"] = consts.k_hat;
  res.stats["d1"] = consts.d1;
  res.stats["delta1"] = consts.delta1;
  {
    std::ofstream out(cfg.out_dir + "/crit_constants.json", std::ios::binary);
    out << constants_to_json(consts) << "\n";
  }

  // Holdout: disjoint rays (rotated) and a different step ladder.
  auto set_b = continue_components(ctx.map, ctx.delta1, n_rays, n_steps + 7,
                                   M_PI / n_rays);
  HolderReport holdout = verify_holder_bounds(consts, set_b, ctx.map, ctx.p);
  res.checks += holdout.samples_checked;
  res.violations += static_cast<int>(holdout.violations.size());

  // Root count at random parameters.
  Rng rng(cfg.seed + 23);
  for (int i = 0; i < 100; ++i) {
    Cplx t = rng.in_disk(ctx.delta1);
    auto roots = fiber_critical_points(ctx.map, t);
    ++res.checks;
    if (static_cast<int>(roots.size()) != ctx.map.degree() - 1) ++res.violations;
    for (Cplx z : roots) {
      ++res.checks;
      if (std::abs(dz(ctx.map, t, z)) >
          1e-10 * std::pow(1.0 + std::abs(z), ctx.map.degree() - 1))
        ++res.violations;
    }
  }

  // Estimator stability: doubling the step count moves K1_hat by <= 5%.
  auto set_a2 = continue_components(ctx.map, ctx.delta1, n_rays, 2 * n_steps, 0.0);
  CritConstants consts2 = estimate_constants(set_a2, ctx.map, ctx.p);
  ++res.checks;
  if (consts.k1_hat > 0.0 &&
      std::abs(consts2.k1_hat - consts.k1_hat) > 0.05 * consts2.k1_hat)
    ++res.violations;

  res.wall_time_ms = timer.elapsed();
  return res;
}

// ------------------------------------------------------------------ dpu ---

SuiteResult run_dpu_suite(const RunConfig& cfg, RunContext& ctx) {
  Timer timer;
  SuiteResult res;
  const int q = ctx.crit.q();
  res.stats["q"] = q;

  if (q == 0) {
    res.stats["q_hat"] = 0.0;
    res.notes.push_back("q = 0: trimmed orbit sums are vacuous for this map");
    res.wall_time_ms = timer.elapsed();
    return res;
  }

  KFunction kf{ctx.crit.in_julia, 50.0};

  // Seeds: cloud points nudged off J.
  std::vector<Cplx> seeds;
  const size_t stride = std::max<size_t>(1, ctx.cloud.points.size() / cfg.dpu_seeds);
  for (size_t i = 0; i < ctx.cloud.points.size() &&
                     static_cast<int>(seeds.size()) < cfg.dpu_seeds;
       i += stride)
    seeds.push_back(ctx.cloud.points[i] + Cplx(0, 1e-4));

  auto trim_csv = open_csv(cfg.out_dir, "dpu_trim.csv",
                           "seed_re,seed_im,n,trimmed_sum,q_hat");
  for (Cplx seed : seeds) {
    TrimReport rep = trimmed_orbit_sum(ctx.p, kf, seed, cfg.dpu_n);
    trim_csv << format_double(seed.real()) << "," << format_double(seed.imag())
             << "," << rep.n << "," << format_double(rep.trimmed_sum) << ","
             << format_double(rep.q_hat) << "\r\n";
  }

  QEstimate est = estimate_Q(ctx.p, kf, seeds, cfg.dpu_n);
  res.stats["q_hat"] = est.q_hat;
  ++res.checks;  // stability of the estimator between n and n/2
  if (!(std::abs(est.q_hat - est.q_hat_half) <=
        0.5 * std::max(std::abs(est.q_hat), 1e-12)))
    ++res.violations;

  // Cap independence on a seed whose orbit hits the cap at most q times.
  {
    KFunction kf100{ctx.crit.in_julia, 100.0};
    TrimReport r50 = trimmed_orbit_sum(ctx.p, kf, seeds.front(), cfg.dpu_n);
    TrimReport r100 = trimmed_orbit_sum(ctx.p, kf100, seeds.front(), cfg.dpu_n);
    int cap_hits = 0;
    for (double k : r50.k_values)
      if (k >= kf.cap) ++cap_hits;
    if (cap_hits <= q) {
      ++res.checks;
      if (r50.trimmed_sum != r100.trimmed_sum) ++res.violations;
    }
  }

  // Backward contraction: fit on one batch, re-check on a fresh batch.
  Rng rng(cfg.seed + 37);
  auto draw_samples = [&](int want, int max_tries) {
    std::vector<std::pair<Cplx, int>> out;
    for (int tries = 0; tries < max_tries && static_cast<int>(out.size()) < want;
         ++tries) {
      Cplx z = rng.in_disk(ctx.escape_R);
      int n = 1 + static_cast<int>(rng.below(20));
      Cplx w = z;
      bool ok = true;
      for (int j = 0; j < n && ok; ++j) {
        w = ctx.p.eval(w);
        if (std::abs(w) >= ctx.escape_R) ok = false;
      }
      if (!ok) continue;
      if (dist_to_julia(ctx.cloud, w) <= 10.0 * ctx.cloud.resolution) continue;
      if (dist_to_julia(ctx.cloud, z) <= 10.0 * ctx.cloud.resolution) continue;
      out.emplace_back(z, n);
    }
    return out;
  };

  auto fit_batch = draw_samples(200, 20000);
  if (fit_batch.size() < 20) {
    ++res.skipped;
    res.notes.push_back("backward contraction: not enough admissible samples");
  } else {
    SRhoFit fit = fit_s_rho(ctx.p, ctx.cloud, fit_batch);
    res.stats["s_hat"] = fit.s;
    res.stats["rho_hat"] = fit.rho;
    auto fresh = draw_samples(1000, 100000);
    for (const auto& [z, n] : fresh) {
      BackwardCheck chk = check_backward_contraction(ctx.p, ctx.cloud, z, n,
                                                     fit.s, fit.rho,
                                                     ctx.escape_R);
      ++res.checks;
      if (!chk.holds) ++res.violations;
    }
  }

  res.wall_time_ms = timer.elapsed();
  return res;
}

// ---------------------------------------------------------------- bulge ---

SuiteResult run_bulge_suite(const RunConfig& cfg, RunContext& ctx) {
  Timer timer;
  SuiteResult res;
  std::vector<HorizontalDisk> accepted_disks;

  // Stable manifolds at the attracting fiber fixed points.
  for (const auto& fp : ctx.attractors) {
    try {
      StableManifold sm = stable_manifold(ctx.map, fp.z_star, 20);
      ++res.checks;
      if (!(sm.residual <= 1e-8)) ++res.violations;
      res.stats["manifold_residual"] =
          std::max(res.stats["manifold_residual"], sm.residual);
      HorizontalDisk disk = make_disk(sm.series, sm.series.radius);
      bool bounded = true;
      for (const Cplx& s : disk.samples)
        if (std::abs(s) > ctx.escape_R) bounded = false;
      if (bounded) accepted_disks.push_back(std::move(disk));
    } catch (const ResonanceError& e) {
      ++res.skipped;
      res.notes.push_back(std::string("stable_manifold skipped: ") + e.what());
    }
  }

  // Explicit pullbacks: constant disks near each attractor, pulled back
  // through every regular preimage branch.
  for (const auto& fp : ctx.attractors) {
    FiberPoly shifted = ctx.p;
    shifted.coeffs[0] -= fp.z_star;
    for (Cplx z0 : aberth_roots(shifted)) {
      if (std::abs(dz(ctx.map, Cplx(0, 0), z0)) < 1e-6) continue;
      if (std::abs(z0) > ctx.escape_R) continue;
      double delta_try = std::min(0.05 * ctx.map.delta, ctx.map.delta);
      HorizontalDisk base = constant_disk(
          fp.z_star, std::abs(ctx.map.lambda) * delta_try);
      PullbackResult pb = pullback_disk(ctx.map, base, z0, delta_try);
      ++res.checks;
      if (pb.ok()) {
        res.stats["pullback_residual"] =
            std::max(res.stats["pullback_residual"], pb.residual);
        bool bounded = true;
        for (const Cplx& s : pb.disk.samples)
          if (std::abs(s) > ctx.escape_R) bounded = false;
        if (bounded) accepted_disks.push_back(std::move(pb.disk));
      } else if (pb.status != PullbackStatus::critical_collision) {
        ++res.violations;  // divergence / fit residual on a regular branch
      }
    }
  }

  // r(z) measurement sites: cloud anchors walked into the Fatou set.
  std::vector<Cplx> sites;
  {
    const double steps[] = {3.2e-3, 1e-2, 3.2e-2, 1e-1, 3.2e-1};
    const size_t stride = std::max<size_t>(1, ctx.cloud.points.size() / 64);
    for (size_t i = 0; i < ctx.cloud.points.size() &&
                       static_cast<int>(sites.size()) < cfg.measure_points;
         i += stride) {
      Cplx w = ctx.cloud.points[i];
      for (double u : steps) {
        std::vector<Cplx> cands;
        for (const auto& fp : ctx.attractors)
          if (std::abs(fp.z_star - w) > 1e-9)
            cands.push_back(w + u * (fp.z_star - w) / std::abs(fp.z_star - w));
        cands.push_back(w + Cplx(0, u));
        cands.push_back(w - Cplx(0, u));
        if (std::abs(w) > 1e-9) cands.push_back(w * (1.0 + u / std::abs(w)));
        for (Cplx z : cands) {
          if (std::abs(z) >= 0.95 * ctx.escape_R) continue;
          if (dist_to_julia(ctx.cloud, z) <= 10.0 * ctx.cloud.resolution) continue;
          if (in_fatou(ctx.p, ctx.cloud, z, cfg.orbit_budget, ctx.attractors,
                       ctx.escape_R) != FatouClass::fatou)
            continue;
          sites.push_back(z);
          if (static_cast<int>(sites.size()) >= cfg.measure_points) break;
        }
        if (static_cast<int>(sites.size()) >= cfg.measure_points) break;
      }
    }
  }

  std::vector<RMeasure> measures(sites.size());
  std::vector<HorizontalDisk> measure_disks(sites.size());
  parallel_for(sites.size(), [&](size_t i) {
    measures[i] = measure_r(ctx.map, ctx.p, ctx.cloud, ctx.attractors, sites[i],
                            ctx.escape_R, cfg.orbit_budget, cfg.bisection_steps,
                            &measure_disks[i]);
  });

  auto csv = open_csv(cfg.out_dir, "bulge_measures.csv",
                      "z_re,z_im,d_julia,r_lo,r_hi");
  int n_accepted = 0;
  for (size_t i = 0; i < measures.size(); ++i) {
    const RMeasure& m = measures[i];
    csv << format_double(m.z.real()) << "," << format_double(m.z.imag()) << ","
        << format_double(dist_to_julia(ctx.cloud, m.z)) << ","
        << format_double(m.r_lo) << "," << format_double(m.r_hi) << "\r\n";
    if (m.accepted) {
      ++n_accepted;
      accepted_disks.push_back(std::move(measure_disks[i]));
    }
  }
  res.stats["measures_accepted"] = n_accepted;

  // Schwarz bound on every accepted horizontal disk of this run.
  for (const auto& disk : accepted_disks) {
    SchwarzReport rep = check_schwarz(disk, ctx.escape_R);
    res.checks += rep.checked;
    res.violations += rep.violations;
  }

  // Envelope fit (skipped when the site spread is too narrow).
  try {
    RadiusEnvelopeFit fit = fit_radius_envelope(measures, ctx.cloud);
    res.stats["k_hat_env"] = fit.k;
    res.stats["l_hat"] = fit.l;
    for (size_t idx : fit.binding)
      res.notes.push_back("envelope witness z = " +
                          format_complex(measures[idx].z) + ", r_lo = " +
                          format_double(measures[idx].r_lo));
    for (const RMeasure& m : measures) {
      if (!m.accepted) continue;
      ++res.checks;
      double d = dist_to_julia(ctx.cloud, m.z);
      if (!(m.r_lo / std::pow(d, fit.l) >= fit.k)) ++res.violations;
    }
  } catch (const DomainError& e) {
    ++res.skipped;
    res.notes.push_back(std::string("fit_radius_envelope skipped: ") + e.what());
  }

  res.wall_time_ms = timer.elapsed();
  return res;
}

// ---------------------------------------------------------------- vdisk ---

SuiteResult run_vdisk_suite(const RunConfig& cfg, RunContext& ctx) {
  Timer timer;
  SuiteResult res;

  Rng rng(cfg.seed + 53);
  auto draw_disk = [&]() {
    Cplx t0 = rng.in_disk(ctx.delta2);
    Cplx center = rng.in_disk(0.8 * ctx.escape_R);
    double r = 0.02 * ctx.escape_R *
               std::pow(10.0, rng.uniform(-1.5, 0.0));  // log-uniform radii
    return make_vertical_disk(t0, center, r);
  };

  // Image-inradius lower bounds: calibrate the constant on one disk set,
  {
    std::vector<VerticalDisk> calib, fresh;
    for (int i = 0; i < cfg.calib_disks; ++i) calib.push_back(draw_disk());
    for (int i = 0; i < cfg.calib_disks; ++i) fresh.push_back(draw_disk());

    double c_deg = calibrate_degree_bound(ctx.map, calib, ctx.escape_R);
    BoundReport deg = check_degree_bound(ctx.map, fresh, c_deg, ctx.escape_R);
    res.stats["c_fit_degree"] = c_deg;
    res.checks += deg.checked;
    res.skipped += deg.skipped;
    res.violations += static_cast<int>(deg.violations.size());

    double c_koebe = calibrate_koebe_bound(ctx.map, calib, ctx.escape_R);
    BoundReport koebe = check_koebe_bound(ctx.map, fresh, c_koebe, ctx.escape_R);
    res.stats["c_fit_koebe"] = c_koebe;
    res.checks += koebe.checked;
    res.skipped += koebe.skipped;
    res.violations += static_cast<int>(koebe.violations.size());

    // per-sample report with witnesses
    auto sample_json = [](const BoundReport& rep) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& s : rep.samples) {
        nlohmann::json e;
        e["t0"] = format_complex(s.disk.t0);
        e["center"] = format_complex(s.disk.center_z);
        e["r"] = s.disk.radius;
        e["eta"] = s.eta;
        e["inradius_1"] = s.inradius_1;
        e["skipped"] = s.skipped;
        arr.push_back(e);
      }
      return arr;
    };
    nlohmann::json rep_json;
    rep_json["degree_bound"] = {{"c_fit", c_deg},
                                {"checked", deg.checked},
                                {"skipped", deg.skipped},
                                {"violations", deg.violations},
                                {"samples", sample_json(deg)}};
    rep_json["koebe_bound"] = {{"c_fit", c_koebe},
                               {"checked", koebe.checked},
                               {"skipped", koebe.skipped},
                               {"violations", koebe.violations},
                               {"samples", sample_json(koebe)}};
    std::ofstream out(cfg.out_dir + "/vdisk_bounds.json", std::ios::binary);
    out << rep_json.dump(2) << "\n";
  }

  // Inradius trace near the primary attractor, when there is one.
  if (!ctx.attractors.empty()) {
    const auto& fp = ctx.attractors.front();
    VerticalDisk disk = make_vertical_disk(Cplx(0.1 * ctx.delta2, 0),
                                           fp.z_star + 0.05, 0.02);
    RhoTrace trace = rho_trace(ctx.map, disk, cfg.n_max,
                               std::abs(ctx.map.lambda), ctx.escape_R);
    auto csv = open_csv(cfg.out_dir, "vdisk_rho_trace.csv", "n,rho_n,ratio");
    for (const auto& row : trace.rows)
      csv << row.n << "," << format_double(row.rho_n) << ","
          << format_double(row.ratio) << "\r\n";
    if (!trace.rows.empty())
      res.stats["rho_ratio_last"] = trace.rows.back().ratio;
  } else {
    ++res.skipped;
    res.notes.push_back("rho trace skipped: no attracting fiber fixed point");
  }

  // Refinement stability: doubling the boundary sampling moves the first
  // inradius by <= 1%.
  for (int i = 0; i < 20; ++i) {
    VerticalDisk d512 = draw_disk();
    VerticalDisk d1024 =
        make_vertical_disk(d512.t0, d512.center_z, d512.radius, 1024);
    auto img512 = push_disk(ctx.map, d512, 1, ctx.escape_R);
    auto img1024 = push_disk(ctx.map, d1024, 1, ctx.escape_R);
    if (img512.front().truncated || boundary_winding(img512.front()) == 0 ||
        boundary_winding(img1024.front()) == 0) {
      ++res.skipped;
      continue;
    }
    double r1 = inradius(img512.front()), r2 = inradius(img1024.front());
    ++res.checks;
    if (std::abs(r1 - r2) > 0.01 * std::max(r1, r2)) ++res.violations;
  }

  // Shadowing: admissible disks around orbit points that stay in the box.
  {
    std::vector<Cplx> centers;
    if (!ctx.attractors.empty()) {
      // points already spiralling toward the attractor
      Rng crng(cfg.seed + 61);
      while (static_cast<int>(centers.size()) < 100) {
        Cplx z = ctx.attractors.front().z_star + crng.in_disk(0.05);
        centers.push_back(z);
      }
    } else {
      const size_t stride = std::max<size_t>(1, ctx.cloud.points.size() / 100);
      for (size_t i = 0; i < ctx.cloud.points.size() && centers.size() < 100;
           i += stride)
        centers.push_back(ctx.cloud.points[i]);
    }
    Rng srng(cfg.seed + 71);
    double worst = 0.0;
    for (Cplx center : centers) {
      int n = 1 + static_cast<int>(srng.below(5));
      int m = 1 + static_cast<int>(srng.below(8));
      double l3p = std::pow(cfg.lambda3, n + 1);
      double radius = l3p * (0.2 + 0.8 * srng.uniform());
      Cplx t0 = srng.in_disk(std::pow(std::abs(ctx.map.lambda), n + 1));
      VerticalDisk disk = make_vertical_disk(t0, center, radius, 64);
      ShadowReport rep =
          shadowing_check(ctx.map, disk, n, m, cfg.lambda3, ctx.escape_R);
      if (!rep.admissible) {
        ++res.skipped;
        continue;
      }
      res.checks += rep.checked;
      res.violations += rep.violations;
      worst = std::max(worst, rep.worst_margin);
      res.stats["shadow_m"] = rep.m_const;
    }
    res.stats["shadow_worst_margin"] = worst;
  }

  res.wall_time_ms = timer.elapsed();
  return res;
}

}  // namespace

// ----------------------------------------------------------- RunConfig ---

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_map = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t");
      size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto as_int = [&](int lo) {
      long v = std::stol(value);
      if (v < lo)
        throw ConfigError("config line " + std::to_string(line_no) + ": " +
                          key + " must be >= " + std::to_string(lo));
      return static_cast<int>(v);
    };
    auto as_double = [&]() { return std::stod(value); };

    if (key == "map_file") {
      cfg.map_file = value;
      have_map = true;
    } else if (key == "suite") {
      if (value == "all") cfg.suite = Suite::all;
      else if (value == "dpu") cfg.suite = Suite::dpu;
      else if (value == "crit") cfg.suite = Suite::crit;
      else if (value == "bulge") cfg.suite = Suite::bulge;
      else if (value == "vdisk") cfg.suite = Suite::vdisk;
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown suite '" + value + "'");
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "orbit_budget") {
      cfg.orbit_budget = as_int(1);
    } else if (key == "bisection_steps") {
      cfg.bisection_steps = as_int(1);
    } else if (key == "n_points") {
      cfg.n_points = as_int(1000);
    } else if (key == "n_max") {
      cfg.n_max = as_int(1);
    } else if (key == "eps_j") {
      cfg.eps_j = as_double();
    } else if (key == "lambda3") {
      cfg.lambda3 = as_double();
    } else if (key == "delta1") {
      cfg.delta1 = as_double();
    } else if (key == "delta2") {
      cfg.delta2 = as_double();
    } else if (key == "crit_tol") {
      cfg.crit_tol = as_double();
    } else if (key == "generations") {
      cfg.generations = as_int(1);
    } else if (key == "dpu_n") {
      cfg.dpu_n = as_int(2);
    } else if (key == "dpu_seeds") {
      cfg.dpu_seeds = as_int(1);
    } else if (key == "measure_points") {
      cfg.measure_points = as_int(1);
    } else if (key == "calib_disks") {
      cfg.calib_disks = as_int(1);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!have_map) throw ConfigError("config: missing 'map_file'");
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    RunConfig cfg = parse_run_config(buf.str());
    // A relative map_file is taken relative to the config file location.
    std::filesystem::path map_path(cfg.map_file);
    if (map_path.is_relative()) {
      std::filesystem::path base = std::filesystem::path(path).parent_path();
      cfg.map_file = (base / map_path).string();
    }
    return cfg;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------- RunSummary ---

int RunSummary::total_violations() const {
  int n = 0;
  for (const auto& [name, suite] : suites) n += suite.violations;
  return n;
}

int RunSummary::total_errors() const {
  int n = 0;
  for (const auto& [name, suite] : suites) n += suite.errors;
  return n;
}

std::string RunSummary::to_json() const {
  nlohmann::json j;
  j["map_digest"] = map_digest;
  for (const auto& [name, suite] : suites) {
    nlohmann::json s;
    s["checks"] = suite.checks;
    s["violations"] = suite.violations;
    s["errors"] = suite.errors;
    s["skipped"] = suite.skipped;
    s["wall_time_ms"] = suite.wall_time_ms;
    for (const auto& [k, v] : suite.stats) s[k] = v;
    if (!suite.notes.empty()) s["notes"] = suite.notes;
    j["suites"][name] = s;
  }
  return j.dump(2);
}

// ----------------------------------------------------------- commands ---

int cmd_verify(const RunConfig& cfg, RunSummary* summary_out) {
  RunSummary summary;
  int exit_code = 0;
  try {
    std::filesystem::create_directories(cfg.out_dir);
    RunContext ctx;
    ctx.map = load_map_file(cfg.map_file);
    summary.map_digest = file_digest(cfg.map_file);
    ctx.p = ctx.map.invariant_fiber_poly();
    ctx.escape_R = escape_radius(ctx.map);
    ctx.delta1 = cfg.delta1 > 0.0 ? cfg.delta1 : ctx.map.delta / 2.0;
    ctx.delta2 = cfg.delta2 > 0.0 ? cfg.delta2 : ctx.map.delta / 2.0;
    ctx.crit_tol = cfg.crit_tol > 0.0 ? cfg.crit_tol : 4.0 * cfg.eps_j;

    summary.suites["julia"] = run_julia_suite(cfg, ctx);
    if (cfg.suite == Suite::all || cfg.suite == Suite::crit)
      summary.suites["crit"] = run_crit_suite(cfg, ctx);
    if (cfg.suite == Suite::all || cfg.suite == Suite::dpu)
      summary.suites["dpu"] = run_dpu_suite(cfg, ctx);
    if (cfg.suite == Suite::all || cfg.suite == Suite::bulge)
      summary.suites["bulge"] = run_bulge_suite(cfg, ctx);
    if (cfg.suite == Suite::all || cfg.suite == Suite::vdisk)
      summary.suites["vdisk"] = run_vdisk_suite(cfg, ctx);
  } catch (const ConfigError&) {
    throw;  // caller maps to exit 2
  } catch (const NonConvergence& e) {
    SuiteResult& err = summary.suites["error"];
    ++err.errors;
    err.notes.push_back(e.what());
    exit_code = 3;
  } catch (const DomainError& e) {
    // a map outside the suites' working hypotheses (e.g. no repelling
    // fixed point to seed the cloud) counts as numerical failure
    SuiteResult& err = summary.suites["error"];
    ++err.errors;
    err.notes.push_back(e.what());
    exit_code = 3;
  }

  if (exit_code == 0 && summary.total_violations() > 0) exit_code = 1;

  std::ofstream out(cfg.out_dir + "/run_summary.json", std::ios::binary);
  out << summary.to_json() << "\n";
  if (summary_out) *summary_out = summary;
  return exit_code;
}

void cmd_render(const RunConfig& cfg, Cplx fiber_t, int resolution,
                const std::string& png_path) {
  SkewMap map = load_map_file(cfg.map_file);
  if (std::abs(fiber_t) > map.delta)
    throw ConfigError("render: |t| exceeds the map domain");
  FiberPoly p = map.invariant_fiber_poly();
  double R = escape_radius(map);
  auto attractors = attracting_only(classify_fixed_points(p));

  std::vector<uint8_t> rgb(static_cast<size_t>(resolution) * resolution * 3);
  parallel_for(resolution, [&](size_t row) {
    for (int col = 0; col < resolution; ++col) {
      Cplx z(-R + 2.0 * R * (col + 0.5) / resolution,
             R - 2.0 * R * (row + 0.5) / resolution);
      Point2 x{fiber_t, z};
      // escape = white, attractor basin = black, undecided = red
      uint8_t r = 220, g = 30, b = 30;
      bool decided = false;
      for (int k = 0; k <= cfg.orbit_budget && !decided; ++k) {
        if (std::abs(x.z) > R) {
          r = g = b = 245;
          decided = true;
          break;
        }
        for (const auto& fp : attractors)
          if (std::abs(x.z - fp.z_star) <= 1e-3 && std::abs(x.t) <= 1e-3) {
            r = g = b = 20;
            decided = true;
            break;
          }
        if (!decided) x = apply(map, x);
      }
      size_t off = (row * resolution + col) * 3;
      rgb[off] = r;
      rgb[off + 1] = g;
      rgb[off + 2] = b;
    }
  });
  write_png_rgb(png_path, resolution, resolution, rgb);
}

void cmd_orbit(const RunConfig& cfg, Cplx t0, Cplx z0, int n,
               std::ostream& out) {
  SkewMap map = load_map_file(cfg.map_file);
  FiberPoly p = map.invariant_fiber_poly();
  double R = escape_radius(map);
  JuliaCloud cloud = julia_cloud(p, std::min(cfg.n_points, 16384),
                                 cfg.generations, cfg.seed, cfg.eps_j);
  Orbit orb = orbit(map, Point2{t0, z0}, n, R);
  out << "n,t_re,t_im,z_re,z_im,abs_z,d_julia\r\n";
  for (size_t k = 0; k < orb.points.size(); ++k) {
    const Point2& x = orb.points[k];
    out << k << "," << format_double(x.t.real()) << ","
        << format_double(x.t.imag()) << "," << format_double(x.z.real()) << ","
        << format_double(x.z.imag()) << "," << format_double(std::abs(x.z))
        << "," << format_double(dist_to_julia(cloud, x.z)) << "\r\n";
  }
  if (orb.escaped_at)
    out << "# escaped at n = " << *orb.escaped_at << "\r\n";
}

}  // namespace skewlab
