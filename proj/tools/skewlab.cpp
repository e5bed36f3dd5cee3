// Command line front end: verification suites, fiber-slice renders, and
// orbit tables for attracting polynomial skew products.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skewlab/complex.hpp"
#include "skewlab/errors.hpp"
#include "skewlab/verify.hpp"

using namespace skewlab;

int main(int argc, char** argv) {
  CLI::App app{"skewlab: numerical laboratory for attracting polynomial skew products"};
  app.require_subcommand(1);

  std::string config_path, t_str = "0,0", t0_str, z0_str, out_png;
  int res = 256, n_iter = 50;

  auto* verify = app.add_subcommand("verify", "run the verification suites");
  verify->add_option("--config", config_path, "run configuration file")
      ->required();

  auto* render = app.add_subcommand("render", "render a Fatou slice {t = const}");
  render->add_option("--config", config_path)->required();
  render->add_option("--t", t_str, "fiber parameter re,im");
  render->add_option("--res", res, "image resolution");
  render->add_option("--out", out_png, "output PNG path");

  auto* orbit = app.add_subcommand("orbit", "print an orbit table as CSV");
  orbit->add_option("--config", config_path)->required();
  orbit->add_option("--t0", t0_str, "initial t as re,im")->required();
  orbit->add_option("--z0", z0_str, "initial z as re,im")->required();
  orbit->add_option("-n", n_iter, "iteration count");

  CLI11_PARSE(app, argc, argv);

  auto parse_pair = [](const std::string& s) {
    size_t comma = s.find(',');
    if (comma == std::string::npos)
      throw ConfigError("expected re,im, got '" + s + "'");
    return Cplx(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
  };

  try {
    RunConfig cfg = load_config_file(config_path);
    if (*verify) {
      RunSummary summary;
      int code = cmd_verify(cfg, &summary);
      std::cout << summary.to_json() << "\n";
      return code;
    }
    if (*render) {
      if (out_png.empty()) out_png = cfg.out_dir + "/render.png";
      cmd_render(cfg, parse_pair(t_str), res, out_png);
      std::cout << out_png << "\n";
      return 0;
    }
    if (*orbit) {
      cmd_orbit(cfg, parse_pair(t0_str), parse_pair(z0_str), n_iter, std::cout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
