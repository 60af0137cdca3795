// Command line driver for the finite cell scenarios.
#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "fcm/experiments.hpp"

int main(int argc, char** argv) {
  using namespace fcm;
  CLI::App app{"Finite cell method experiments"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run a scenario and write CSV/JSON outputs");
  run->set_help_flag("--help", "print this help message and exit");

  experiments::ScenarioConfig cfg;
  std::string family = "bspline", stab = "local", precon = "sipic";
  bool assert_thresholds = false;
  run->add_option("scenario", cfg.scenario, "rotating_square | plate_hole | manufactured")
      ->required()
      ->check(CLI::IsMember({"rotating_square", "plate_hole", "manufactured"}));
  run->add_option("--basis", family, "basis family")->check(CLI::IsMember({"bspline", "lagrange"}));
  run->add_option("--order", cfg.order, "polynomial order p")->check(CLI::Range(1, 4));
  run->add_option("--h", cfg.h, "mesh size (rotating_square)")->check(CLI::PositiveNumber);
  run->add_option("--depth", cfg.depth, "tessellation depth (rotating_square)")->check(CLI::NonNegativeNumber);
  run->add_option("--angles", cfg.angles, "number of rotation angles")->check(CLI::PositiveNumber);
  run->add_option("--levels", cfg.levels, "mesh levels (plate_hole, manufactured)")->check(CLI::PositiveNumber);
  run->add_option("--gamma", cfg.gamma, "orthonormalization threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("--stab", stab, "stabilization mode")->check(CLI::IsMember({"local", "global"}));
  run->add_option("--beta-multiplier", cfg.beta_multiplier, "beta_i = multiplier * C_i");
  run->add_option("--precon", precon, "none | scale | sipic")->check(CLI::IsMember({"none", "scale", "sipic"}));
  run->add_option("--cg-tol", cfg.cg_rel_tol, "CG relative tolerance");
  run->add_option("--cg-max-iter", cfg.cg_max_iter, "CG iteration cap");
  run->add_option("--out", cfg.out_dir, "output directory")->required();
  bool no_kappa = false, no_cg = false;
  run->add_flag("--no-kappa", no_kappa, "skip condition number estimates (fill-in only sweeps)");
  run->add_flag("--no-cg", no_cg, "skip the sweep CG solves");
  run->add_flag("--export-systems", cfg.export_systems, "write system_<k>.mtx per angle");
  run->add_flag("--assert", assert_thresholds, "exit non-zero when an acceptance threshold is violated");

  CLI11_PARSE(app, argc, argv);

  cfg.family = family == "lagrange" ? basis::Family::lagrange : basis::Family::bspline;
  cfg.stab = stab == "global" ? assembly::StabMode::global : assembly::StabMode::local;
  static const std::map<std::string, experiments::Precon> precons{
      {"none", experiments::Precon::none}, {"scale", experiments::Precon::scale}, {"sipic", experiments::Precon::sipic}};
  cfg.precon = precons.at(precon);
  cfg.kappa = !no_kappa;
  cfg.cg = !no_cg;
  try {
    return experiments::run_scenario(cfg, assert_thresholds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
