// Command-line driver for the periodic compressible two-phase solver.
//
//   nsch run    [options]               simulate from fresh initial data
//   nsch resume --from CKPT [options]   continue a checkpointed run
//   nsch check  [--dir DIR]             re-evaluate verdicts from a series
//   nsch norms  --from CKPT             print the norm suite of a checkpoint
//   nsch sweep  --axis KEY --values V,… one run per value, plus a summary
//
// Every option can also be given through --config FILE (INI format): the
// section becomes the prefix, so `[params] nu0=0.05` equals --params.nu0.
// Command-line values win over the file.  NSCH_OUTPUT_DIR, when set, wins
// over both for the output directory.
//
// Exit codes: 0 checks pass, 1 a check failed, 2 blow-up, 3 bad
// configuration or I/O failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "nsch/harness.hpp"

namespace {

/// INI reader that folds "[section] key" into the flat dotted option names
/// this driver uses ("--section.key").  The stock reader would instead try
/// to resolve sections as nested subcommands and silently drop everything.
struct FlatSectionINI : CLI::ConfigINI {
  std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
    std::vector<CLI::ConfigItem> out;
    for (CLI::ConfigItem& item : CLI::ConfigINI::from_config(is)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      for (auto p = item.parents.rbegin(); p != item.parents.rend(); ++p)
        item.name = *p + "." + item.name;
      item.parents.clear();
      out.push_back(std::move(item));
    }
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  nsch::RunConfig cfg;
  std::string from;
  std::string check_dir;
  std::string axis;
  std::vector<double> values;

  CLI::App app{
      "Pseudo-spectral solver for a compressible two-phase flow model on the "
      "periodic unit torus, with a built-in verification harness"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "INI configuration file");
  app.config_formatter(std::make_shared<FlatSectionINI>());
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("--grid.dim", cfg.dim, "space dimension (2 or 3)");
  app.add_option("--grid.n", cfg.n, "grid points per axis (even)");

  app.add_option("--params.rho_bar", cfg.params.rho_bar, "mean density");
  app.add_option("--params.gamma", cfg.params.gamma, "adiabatic exponent");
  app.add_option("--params.p_coeff", cfg.params.p_coeff,
                 "pressure coefficient A in p = A rho^gamma");
  app.add_option("--params.nu0", cfg.params.nu0, "constant shear viscosity");
  app.add_option("--params.nu1", cfg.params.nu1,
                 "phi^2 coefficient of the shear viscosity");
  app.add_option("--params.lam0", cfg.params.lam0, "bulk viscosity");
  app.add_option("--params.eps", cfg.params.eps, "interface width");

  app.add_option("--step.dt", cfg.step.dt, "fixed step size (adaptive=false)");
  app.add_option("--step.adaptive", cfg.step.adaptive,
                 "choose dt from the CFL and stiffness bounds");
  app.add_option("--step.cfl", cfg.step.cfl, "advective CFL number");
  app.add_option("--step.dt_min", cfg.step.dt_min, "lower clamp for dt");
  app.add_option("--step.dt_max", cfg.step.dt_max, "upper clamp for dt");
  app.add_option("--step.implicit_phase", cfg.step.implicit_phase,
                 "treat the constant-coefficient phase operator implicitly");
  app.add_option("--step.implicit_viscous", cfg.step.implicit_viscous,
                 "treat the constant-coefficient viscous operator implicitly");
  app.add_option("--step.rho_floor_frac", cfg.step.rho_floor_frac,
                 "blow-up guard: abort when rho < frac * rho_bar");
  app.add_option("--step.stab_margin", cfg.step.stab_margin,
                 "safety factor for the explicit-remainder stability cap");
  app.add_option("--step.ramp_rate", cfg.step.ramp_rate,
                 "startup ramp: dt <= floor + rate*t, 0 disables");
  app.add_option("--step.theta_shift", cfg.step.theta_shift,
                 "implicit phase solve theta = 1/2 + shift*dt");

  app.add_option("--perturbation.delta", cfg.perturbation.delta,
                 "perturbation size (smallness bracket, or literal norms in "
                 "large mode)");
  app.add_option("--perturbation.seed", cfg.perturbation.seed, "RNG seed");
  app.add_option("--perturbation.k_min", cfg.perturbation.k_min,
                 "lowest excited wavenumber");
  app.add_option("--perturbation.k_max", cfg.perturbation.k_max,
                 "highest excited wavenumber");
  app.add_option("--perturbation.base", cfg.perturbation.base,
                 "uniform base value of the phase field");
  app.add_option("--perturbation.stripe", cfg.perturbation.stripe,
                 "start from a tanh stripe interface instead of a uniform "
                 "phase");
  app.add_option("--perturbation.stripe_width", cfg.perturbation.stripe_width,
                 "stripe interface width");
  app.add_option("--perturbation.neg_s_target", cfg.perturbation.neg_s_target,
                 "tilt the random spectrum toward low modes (exponent)");
  app.add_option("--perturbation.mode", cfg.mode,
                 "well (calibrated smallness bracket) or large (literal "
                 "norms)");

  app.add_option("--run.t_end", cfg.t_end, "final time");
  app.add_option("--run.sample_every", cfg.sample_every,
                 "record a sample every this many steps");
  app.add_option("--run.checkpoint_every", cfg.checkpoint_every,
                 "write checkpoint_<step>.bin every this many steps (0: only "
                 "the final one)");
  app.add_option("--run.output_dir", cfg.output_dir, "output directory");
  app.add_option("--run.inject_mass_drift", cfg.inject_mass_drift,
                 "fault injection: add drift*dt to the density every step");

  app.add_option("--checks.conservation", cfg.checks.conservation,
                 "enable the conserved-mean drift check");
  app.add_option("--checks.energy_law", cfg.checks.energy_law,
                 "enable the energy-budget check");
  app.add_option("--checks.apriori", cfg.checks.apriori,
                 "enable the boundedness checks");
  app.add_option("--checks.decay", cfg.checks.decay,
                 "enable the algebraic-decay envelope checks");
  app.add_option("--checks.neg_energy", cfg.checks.neg_energy,
                 "enable the low-mode energy boundedness check");
  app.add_option("--checks.decay_s", cfg.decay_s,
                 "decay exponent s (low bracket decays like (1+t)^-s, high "
                 "like (1+t)^-(2+s))");
  app.add_option("--checks.decay_t0", cfg.decay_t0,
                 "anchor time of the decay envelopes (>= 1)");
  app.add_option("--checks.neg_s", cfg.neg_s,
                 "order s of the negative-index energy E_{-s}");
  app.add_option("--checks.neg_factor", cfg.neg_factor,
                 "allowed growth factor of E_{-s} over its early supremum");
  app.add_option("--checks.energy_slack", cfg.energy_slack,
                 "allowed relative slack in the energy budget");
  app.add_option("--checks.conservation_tol", cfg.conservation_tol,
                 "allowed relative drift of conserved means");

  CLI::App* c_run = app.add_subcommand("run", "simulate from fresh initial data");
  CLI::App* c_resume =
      app.add_subcommand("resume", "continue from a checkpoint");
  c_resume->add_option("--from", from, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App* c_check = app.add_subcommand(
      "check", "re-evaluate the checks of an existing series");
  c_check->add_option("--dir", check_dir,
                      "directory holding series.ndjson (default: the "
                      "configured output directory)");
  CLI::App* c_norms = app.add_subcommand(
      "norms", "print the norm suite and energies of a checkpoint as JSON");
  c_norms->add_option("--from", from, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "one run per axis value, with a summary row each");
  c_sweep->add_option("--axis", axis, "dotted name of the swept knob, e.g. "
                                      "perturbation.delta")
      ->required();
  c_sweep->add_option("--values", values, "comma-separated values")
      ->required()
      ->delimiter(',');

  app.require_subcommand(1);
  for (auto* s : {c_run, c_resume, c_check, c_norms, c_sweep})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nsch::exit_config_error;
  }

  try {
    if (c_run->parsed()) return nsch::cmd_run(cfg);
    if (c_resume->parsed()) return nsch::cmd_resume(cfg, from);
    if (c_check->parsed())
      return nsch::cmd_check(cfg, check_dir.empty()
                                      ? std::nullopt
                                      : std::optional<std::string>(check_dir));
    if (c_norms->parsed()) return nsch::cmd_norms(from, cfg.neg_s, std::cout);
    if (c_sweep->parsed()) return nsch::cmd_sweep(cfg, axis, values);
  } catch (const nsch::BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << " at t = " << e.t << '\n';
    return nsch::exit_blowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nsch::exit_config_error;
  }
  return nsch::exit_config_error;
}
