#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "skewlab/complex.hpp"

namespace skewlab {

enum class Suite { all, dpu, crit, bulge, vdisk };

/// Strictly parsed key/value run configuration (unknown keys are fatal).
struct RunConfig {
  std::string map_file;
  Suite suite = Suite::all;
  uint64_t seed = 1;
  std::string out_dir = ".";

  // budgets
  int orbit_budget = 1000;
  int bisection_steps = 20;
  int n_points = 65536;
  int n_max = 25;

  // tolerance / protocol overrides
  double eps_j = 1e-3;
  double lambda3 = 0.3;
  double delta1 = 0.0;  // 0: use map.delta / 2
  double delta2 = 0.0;  // 0: use map.delta / 2
  double crit_tol = 0.0;  // 0: use 4 eps_j
  int generations = 48;
  int dpu_n = 200;
  int dpu_seeds = 100;
  int measure_points = 60;
  int calib_disks = 250;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

struct SuiteResult {
  int checks = 0;
  int violations = 0;
  int errors = 0;
  int skipped = 0;
  double wall_time_ms = 0.0;
  std::map<std::string, double> stats;  // fitted constants etc.
  std::vector<std::string> notes;
};

struct RunSummary {
  std::string map_digest;
  std::map<std::string, SuiteResult> suites;

  int total_violations() const;
  int total_errors() const;
  std::string to_json() const;  // sorted keys, UTF-8
};

/// Runs the selected suites in dependency order, writes every CSV and the
/// summary JSON under config.out_dir. Returns the process exit code:
/// 0 clean, 1 property violation, 2 config error, 3 numerical
/// non-convergence.
int cmd_verify(const RunConfig& config, RunSummary* summary_out = nullptr);

/// Three-class Fatou slice render (escape / attractor / undecided) of the
/// fiber t = fiber_t, written as an 8-bit RGB PNG. Deterministic pixels.
void cmd_render(const RunConfig& config, Cplx fiber_t, int resolution,
                const std::string& png_path);

/// Orbit table CSV (n, t, z, |z|, d(z_n, J(p))) written to `out`.
void cmd_orbit(const RunConfig& config, Cplx t0, Cplx z0, int n,
               std::ostream& out);

}  // namespace skewlab
