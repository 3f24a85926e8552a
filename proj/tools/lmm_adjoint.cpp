#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "lmmadj/cli/config.hpp"
#include "lmmadj/cli/experiments.hpp"
#include "lmmadj/errors.hpp"

namespace {

constexpr const char* kConfigHelp = R"(Config file: `key = value` lines grouped in [sections]; `#` comments.
The <experiment> argument names a section. Its `kind` key selects the runner
(default: the section name itself).

ode-converge       problem (const-fy | quadratic-fy | riccati), schemes, n,
                   T, alpha, terminal (native | exact | rk),
                   precision (double | long-double), route, am_denominator
relax-forward      model (jin-xin | broadwell), flux (linear | burgers), speed
                   (number | auto = dx/dt), x_left, x_right, nx, dt, boundary
                   (periodic | clamp), foot (aligned | linear), epsilon,
                   scheme (BDFk), T or steps, initial, snapshot_every
relax-adjoint      as relax-forward with nx and epsilon as lists, plus
                   oracle_below, reference_refinement
control-jinxin,    as relax-forward plus truth, guess, iterations,
control-broadwell  filter_every (0 = off), bb (bb2 | bb1 | fixed), sigma0,
                   sigma_min, sigma_max, tolerance, save_every

Profiles: gaussian(amp, centre, width), step(value, lo, hi), ramp(lo, hi),
constant(value), rest(rho), sine-momentum(lo, hi, rho).)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjoint multistep experiments: convergence tables, relaxation runs, control."};
  app.footer(kConfigHelp);
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::string am_den;
  std::string route;
  app.add_option("experiment", experiment, "Config section to run")->required();
  app.add_option("--config", config_path, "Experiment config file")->required();
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--am-denominator", am_den, "AM(4) weight denominator")
      ->check(CLI::IsMember({"270", "720"}));
  app.add_option("--route", route, "Adjoint route for ODE tables")
      ->check(CLI::IsMember({"dto", "otd", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = lmmadj::cli::ExperimentConfig::load(config_path);
    lmmadj::cli::RunContext ctx;
    if (!out_dir.empty()) ctx.out_dir = out_dir;
    if (!am_den.empty()) {
      ctx.overrides.am_denominator = lmmadj::cli::parse_am_denominator(am_den, "--am-denominator");
    }
    if (!route.empty()) ctx.overrides.route = route;
    ctx.log = &std::cout;
    lmmadj::cli::run_experiment(cfg, experiment, ctx);
  } catch (const lmmadj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lmmadj::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const lmmadj::ModelError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
