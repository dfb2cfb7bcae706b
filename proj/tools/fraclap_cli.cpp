// Command-line driver: four experiment subcommands over the fractional
// Laplacian toolkit.  Flags override config-file values; every run leaves a
// metadata JSON next to its CSV artifacts.
#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <set>
#include <string>

#include "runner/commands.hpp"
#include "runner/options.hpp"

namespace {

using fraclap::runner::RunConfig;

/// Option handles per config-file key, so config application can tell which
/// flags the command line already set.
using KeyMap = std::map<std::string, CLI::Option*>;

void add_common(CLI::App* cmd, RunConfig& config, KeyMap& keys) {
  keys["L"] = cmd->add_option("--L", config.L,
                              "half-width of the domain (-L, L)")
                  ->capture_default_str();
  keys["out"] = cmd->add_option("--out", config.out_dir,
                                "artifact output directory")
                    ->capture_default_str();
  keys["seed"] =
      cmd->add_option("--seed", config.seed,
                      "seed recorded in run metadata (no command draws "
                      "random numbers; kept for reproducibility bookkeeping)")
          ->capture_default_str();
  cmd->add_option("--config", config.config_file,
                  "flat key=value file using these option names; "
                  "command-line flags take precedence");
}

void add_jobs(CLI::App* cmd, RunConfig& config, KeyMap& keys) {
  keys["jobs"] =
      cmd->add_option("--jobs", config.jobs,
                      "worker threads for independent study cells (output "
                      "order is schedule-independent)")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Finite-element toolkit for the one-dimensional integral fractional "
      "Laplacian: elliptic solves, convergence studies, penalized "
      "null-control experiments, and spectral checks."};
  app.require_subcommand(1);
  RunConfig config;
  std::map<CLI::App*, KeyMap> key_maps;

  auto* solve = app.add_subcommand(
      "solve", "solve the fractional Poisson problem on one mesh");
  {
    KeyMap& keys = key_maps[solve];
    keys["s"] = solve->add_option("--s", config.s_spec,
                                  "fractional order in (0, 1)")
                    ->default_str("0.5");
    keys["N"] = solve->add_option("--N", config.n_spec,
                                  "number of interior nodes")
                    ->default_str("50");
    keys["f"] = solve->add_option("--f", config.f_selector,
                                  "right-hand side: one|zero|x|poly:c0,c1,...")
                    ->capture_default_str();
    keys["solver"] =
        solve->add_option("--solver", config.solver,
                          "linear solver: direct (dense Cholesky) or cg "
                          "(matrix-free FFT Toeplitz)")
            ->capture_default_str();
    keys["cg-tol"] = solve->add_option("--cg-tol", config.cg_tol,
                                       "relative tolerance for cg")
                         ->capture_default_str();
    add_common(solve, config, keys);
  }

  auto* convergence = app.add_subcommand(
      "convergence",
      "energy-norm and max-norm error study against the closed-form "
      "constant-load solution over an (s, N) grid");
  {
    KeyMap& keys = key_maps[convergence];
    keys["s"] = convergence->add_option("--s", config.s_spec,
                                        "comma list of fractional orders")
                    ->default_str("0.1,0.3,0.5,0.7,0.9");
    keys["N"] = convergence->add_option(
                               "--N", config.n_spec,
                               "comma list or doubling range a..b of mesh sizes")
                    ->default_str("16..1024");
    add_jobs(convergence, config, keys);
    add_common(convergence, config, keys);
  }

  auto* control = app.add_subcommand(
      "control",
      "penalized null-control of the fractional heat equation: minimize the "
      "dual functional by conjugate gradients and report cost, optimal "
      "energy, and terminal norm");
  {
    KeyMap& keys = key_maps[control];
    keys["s"] = control->add_option("--s", config.s_spec,
                                    "comma list of fractional orders")
                    ->default_str("0.8");
    keys["N"] = control->add_option(
                           "--N", config.n_spec,
                           "comma list or doubling range a..b of mesh sizes")
                    ->default_str("32..256");
    keys["T"] = control->add_option("--T", config.horizon, "time horizon")
                    ->capture_default_str();
    keys["M"] = control->add_option("--M", config.steps,
                                    "number of implicit Euler steps")
                    ->capture_default_str()
                    ->check(CLI::PositiveNumber);
    keys["omega"] = control->add_option("--omega", config.omega_spec,
                                        "control region a,b inside [-L, L]")
                        ->capture_default_str();
    keys["eps"] =
        control->add_option("--eps", config.eps_rule,
                            "penalty strength: h, h^alpha, or a positive number")
            ->capture_default_str();
    keys["z0"] = control->add_option(
                            "--z0", config.z0_selector,
                            "initial datum: sinpi|one|zero|x|poly:c0,c1,...")
                     ->capture_default_str();
    keys["tol"] = control->add_option("--tol", config.hum_tol,
                                      "conjugate-gradient relative tolerance")
                      ->capture_default_str();
    keys["max-iter"] = control->add_option("--max-iter", config.hum_max_iter,
                                           "conjugate-gradient iteration cap")
                           ->capture_default_str()
                           ->check(CLI::PositiveNumber);
    keys["trajectory"] =
        control->add_option("--trajectory", config.trajectory,
                            "dump the controlled state history: none|csv|bin")
            ->capture_default_str();
    add_jobs(control, config, keys);
    add_common(control, config, keys);
  }

  auto* eigs = app.add_subcommand(
      "eigs",
      "generalized eigenvalues of the stiffness/mass pencil on (-1, 1) "
      "against the asymptotic law");
  {
    KeyMap& keys = key_maps[eigs];
    keys["s"] = eigs->add_option("--s", config.s_spec,
                                 "comma list of fractional orders")
                    ->default_str("0.5");
    keys["N"] = eigs->add_option(
                        "--N", config.n_spec,
                        "comma list or doubling range a..b of mesh sizes")
                    ->default_str("1024");
    keys["K"] = eigs->add_option("--K", config.eigen_count,
                                 "number of eigenvalues to report (1 <= K <= N)")
                    ->capture_default_str()
                    ->check(CLI::PositiveNumber);
    add_jobs(eigs, config, keys);
    add_common(eigs, config, keys);
  }

  // Per-command defaults for the grid specs (shared fields, so they cannot
  // carry distinct initializers).
  solve->callback([&] {
    config.command = "solve";
    if (!key_maps[solve]["s"]->count()) config.s_spec = "0.5";
    if (!key_maps[solve]["N"]->count()) config.n_spec = "50";
  });
  convergence->callback([&] {
    config.command = "convergence";
    if (!key_maps[convergence]["s"]->count())
      config.s_spec = "0.1,0.3,0.5,0.7,0.9";
    if (!key_maps[convergence]["N"]->count()) config.n_spec = "16..1024";
  });
  control->callback([&] {
    config.command = "control";
    if (!key_maps[control]["s"]->count()) config.s_spec = "0.8";
    if (!key_maps[control]["N"]->count()) config.n_spec = "32..256";
  });
  eigs->callback([&] {
    config.command = "eigs";
    if (!key_maps[eigs]["s"]->count()) config.s_spec = "0.5";
    if (!key_maps[eigs]["N"]->count()) config.n_spec = "1024";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fraclap::runner::exit_config_error;
  }

  if (!config.config_file.empty()) {
    CLI::App* active = nullptr;
    for (auto& [cmd, keys] : key_maps)
      if (cmd->parsed()) active = cmd;
    std::set<std::string> cli_given;
    for (const auto& [key, option] : key_maps[active])
      if (option->count() > 0) cli_given.insert(key);
    try {
      fraclap::runner::apply_config_file(config, config.config_file, cli_given);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return fraclap::runner::exit_config_error;
    }
  }

  return fraclap::runner::run(config);
}
