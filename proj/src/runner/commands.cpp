#include "runner/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <fraclap/elliptic.hpp>
#include <fraclap/hum.hpp>
#include <fraclap/spectrum.hpp>
#include <fraclap/toeplitz.hpp>

#include "runner/artifacts.hpp"

namespace fraclap::runner {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double quiet_nan = std::numeric_limits<double>::quiet_NaN();

/// Runs work(0..count-1) on up to `jobs` threads.  Results land in
/// caller-owned slots indexed by cell, so output order never depends on the
/// schedule.  Returns one error message per cell ("" = success).
std::vector<std::string> for_each_cell(int jobs, int count,
                                       const std::function<void(int)>& work) {
  std::vector<std::string> errors(count);
  const auto guarded = [&](int i) {
    try {
      work(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    } catch (...) {
      errors[i] = "unknown failure";
    }
  };
  const int team_size = std::min(jobs, count);
  if (team_size <= 1) {
    for (int i = 0; i < count; ++i) guarded(i);
    return errors;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> team;
  team.reserve(team_size);
  for (int t = 0; t < team_size; ++t)
    team.emplace_back([&] {
      for (int i = next++; i < count; i = next++) guarded(i);
    });
  for (auto& member : team) member.join();
  return errors;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

void validate_s_values(const std::vector<double>& s_list) {
  for (const double s : s_list)
    require(s > 0.0 && s < 1.0, "s must lie in (0, 1), got " +
                                    format_brief(s));
}

std::vector<std::string> degeneracy_warnings(const std::vector<double>& s_list) {
  std::vector<std::string> warnings;
  for (const double s : s_list)
    if (s <= 0.01 || s >= 0.99)
      warnings.push_back(
          "s = " + format_brief(s) +
          " is near the admissible boundary: the order constants are close "
          "to singular and conditioning degrades");
  return warnings;
}

json config_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"config_file", c.config_file},
              {"L", c.L},
              {"s", c.s_spec},
              {"N", c.n_spec},
              {"out", c.out_dir},
              {"seed", c.seed},
              {"jobs", c.jobs},
              {"f", c.f_selector},
              {"solver", c.solver},
              {"cg_tol", c.cg_tol},
              {"T", c.horizon},
              {"M", c.steps},
              {"omega", c.omega_spec},
              {"eps", c.eps_rule},
              {"z0", c.z0_selector},
              {"hum_tol", c.hum_tol},
              {"hum_max_iter", c.hum_max_iter},
              {"trajectory", c.trajectory},
              {"K", c.eigen_count}};
}

/// Shared metadata skeleton; commands add their own entries.
json base_metadata(const RunConfig& c, const std::vector<std::string>& warnings) {
  json doc;
  doc["command"] = c.command;
  doc["config"] = config_json(c);
  doc["seed"] = c.seed;
  doc["warnings"] = warnings;
  doc["conventions"] = {
      {"state_space_norm", "h-weighted Euclidean norm on interior nodes"},
      {"duality_pairing", "mass-matrix inner product for (z^M, phi) terms"},
      {"control_injection", "h-scaled indicator load dt*h*(mask.*v)"},
      {"penalty_norm", "mass-matrix norm on the terminal state"},
      {"cg_inner_product", "mass-matrix inner product on adjoint data"},
  };
  return doc;
}

void finish_metadata(json& doc, const fs::path& dir,
                     const std::vector<std::string>& artifacts,
                     std::chrono::steady_clock::time_point start) {
  doc["artifacts"] = artifacts;
  doc["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_metadata(dir / "metadata.json", doc);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int report_cell_errors(const std::vector<std::string>& errors) {
  int failures = 0;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      ++failures;
      std::cerr << "error: cell " << i << ": " << errors[i] << '\n';
    }
  return failures;
}

// --------------------------------------------------------------------------
// solve

int run_solve(const RunConfig& c) {
  const auto s_list = parse_double_list(c.s_spec);
  const auto n_list = parse_int_list(c.n_spec);
  require(s_list.size() == 1 && n_list.size() == 1,
          "solve expects a single s and a single N");
  validate_s_values(s_list);
  require(c.L > 0.0, "L must be positive");
  require(c.solver == "direct" || c.solver == "cg",
          "solver must be direct or cg");
  require(c.cg_tol > 0.0, "cg tolerance must be positive");
  const auto f = make_scalar_field(c.f_selector);

  const auto warnings = degeneracy_warnings(s_list);
  print_warnings(warnings);
  ensure_directory(c.out_dir);
  const auto start = std::chrono::steady_clock::now();

  const auto problem = make_mesh(s_list[0], c.L, n_list[0]);
  const Vector<double> load = assemble_load<double>(problem, f);
  const auto solution = c.solver == "cg"
                            ? solve_elliptic_cg(problem, load, c.cg_tol)
                            : solve_elliptic(problem, load);

  const bool unit_load = c.f_selector == "one";
  const double hs = unit_load ? hs_error(solution) : quiet_nan;
  const double linf = unit_load ? linf_error(solution) : quiet_nan;

  const fs::path dir = c.out_dir;
  {
    CsvWriter csv(dir / "solution.csv", "x,value");
    csv.row({format_value(-problem.L), format_value(0.0)});
    for (int i = 0; i < problem.n; ++i)
      csv.row({format_value(problem.node(i)), format_value(solution.coeffs[i])});
    csv.row({format_value(problem.L), format_value(0.0)});
  }
  {
    CsvWriter csv(dir / "errors.csv", "s,N,h,hs_error,linf_error,residual");
    csv.row({format_value(problem.s), std::to_string(problem.n),
             format_value(problem.h), format_value(hs), format_value(linf),
             format_value(solution.residual)});
  }

  std::printf("[solve] s=%s N=%d h=%s solver=%s residual=%s hs_error=%s "
              "linf_error=%s\n",
              format_brief(problem.s).c_str(), problem.n,
              format_brief(problem.h).c_str(), solution.solver.c_str(),
              format_brief(solution.residual).c_str(),
              format_brief(hs).c_str(), format_brief(linf).c_str());

  json doc = base_metadata(c, warnings);
  doc["exact_reference"] =
      unit_load ? "closed-form bulk profile for the constant load"
                : "none (errors reported as nan)";
  finish_metadata(doc, dir, {"solution.csv", "errors.csv"}, start);
  return exit_ok;
}

// --------------------------------------------------------------------------
// convergence

int run_convergence(const RunConfig& c) {
  const auto s_list = parse_double_list(c.s_spec);
  const auto n_list = parse_int_list(c.n_spec);
  validate_s_values(s_list);
  require(c.L > 0.0, "L must be positive");
  require(c.jobs >= 1, "jobs must be at least 1");

  const auto warnings = degeneracy_warnings(s_list);
  print_warnings(warnings);
  ensure_directory(c.out_dir);
  const auto start = std::chrono::steady_clock::now();

  struct Cell {
    double s;
    int n;
    ErrorReport<double> report;
  };
  std::vector<Cell> cells;
  for (const double s : s_list)
    for (const int n : n_list) cells.push_back({s, n, {}});

  const auto errors = for_each_cell(
      c.jobs, static_cast<int>(cells.size()), [&](int i) {
        auto& cell = cells[i];
        const auto problem = make_mesh(cell.s, c.L, cell.n);
        const Vector<double> load =
            assemble_load<double>(problem, [](double) { return 1.0; });
        const auto solution = solve_elliptic(problem, load);
        cell.report = {cell.s,
                       cell.n,
                       problem.h,
                       hs_error(solution),
                       linf_error(solution),
                       solution.residual,
                       true};
      });

  const fs::path dir = c.out_dir;
  {
    CsvWriter csv(dir / "convergence.csv", "s,N,h,hs_error,linf_error,residual");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      const bool ok = errors[i].empty();
      csv.row({format_value(cell.s), std::to_string(cell.n),
               format_value(2.0 * c.L / (cell.n + 1)),
               format_value(ok ? cell.report.hs_err : quiet_nan),
               format_value(ok ? cell.report.linf_err : quiet_nan),
               format_value(ok ? cell.report.residual : quiet_nan)});
    }
  }

  for (std::size_t i = 0; i < cells.size(); ++i)
    if (errors[i].empty())
      std::printf("[convergence] s=%s N=%d h=%s hs_error=%s linf_error=%s\n",
                  format_brief(cells[i].s).c_str(), cells[i].n,
                  format_brief(cells[i].report.h).c_str(),
                  format_brief(cells[i].report.hs_err).c_str(),
                  format_brief(cells[i].report.linf_err).c_str());

  // Observed rates per s over the finest pairs, as a convenience summary.
  if (n_list.size() >= 2)
    for (const double s : s_list) {
      std::vector<double> hs, es;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].s == s && errors[i].empty() &&
            std::isfinite(cells[i].report.hs_err)) {
          hs.push_back(cells[i].report.h);
          es.push_back(cells[i].report.hs_err);
        }
      if (hs.size() >= 2)
        std::printf("[convergence] s=%s observed energy-norm rate=%s\n",
                    format_brief(s).c_str(),
                    format_brief(loglog_slope(hs, es)).c_str());
    }

  json doc = base_metadata(c, warnings);
  doc["load"] = "one (study is defined against the constant-load reference)";
  finish_metadata(doc, dir, {"convergence.csv"}, start);
  return report_cell_errors(errors) ? exit_numerical_failure : exit_ok;
}

// --------------------------------------------------------------------------
// control

void dump_trajectory_csv(const fs::path& path, const FracProblem<double>& p,
                         double dt, const std::vector<Vector<double>>& states) {
  CsvWriter csv(path, "t,x,value");
  for (std::size_t n = 0; n < states.size(); ++n) {
    const std::string t = format_value(dt * static_cast<double>(n));
    csv.row({t, format_value(-p.L), format_value(0.0)});
    for (int i = 0; i < p.n; ++i)
      csv.row({t, format_value(p.node(i)), format_value(states[n][i])});
    csv.row({t, format_value(p.L), format_value(0.0)});
  }
}

void dump_trajectory_bin(const fs::path& path, const FracProblem<double>& p,
                         double dt, const std::vector<Vector<double>>& states) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const char magic[8] = {'F', 'L', 'T', 'R', 'A', 'J', '0', '1'};
  out.write(magic, sizeof magic);
  const std::uint64_t frames = states.size();
  const std::uint64_t nodes = static_cast<std::uint64_t>(p.n);
  out.write(reinterpret_cast<const char*>(&frames), sizeof frames);
  out.write(reinterpret_cast<const char*>(&nodes), sizeof nodes);
  out.write(reinterpret_cast<const char*>(&p.L), sizeof p.L);
  out.write(reinterpret_cast<const char*>(&dt), sizeof dt);
  for (const auto& state : states)
    out.write(reinterpret_cast<const char*>(state.data()),
              static_cast<std::streamsize>(sizeof(double) * state.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int run_control(const RunConfig& c) {
  const auto s_list = parse_double_list(c.s_spec);
  const auto n_list = parse_int_list(c.n_spec);
  validate_s_values(s_list);
  require(c.L > 0.0, "L must be positive");
  require(c.jobs >= 1, "jobs must be at least 1");
  require(c.horizon > 0.0, "T must be positive");
  require(c.steps >= 1, "M must be at least 1");
  const auto [omega_a, omega_b] = parse_interval(c.omega_spec);
  require(omega_a >= -c.L && omega_b <= c.L,
          "omega must sit inside [-L, L]");
  resolve_eps(c.eps_rule, 0.5);  // syntax/positivity check before computing
  const auto z0_field = make_initial_field(c.z0_selector);
  require(c.hum_tol > 0.0, "hum tolerance must be positive");
  require(c.hum_max_iter >= 1, "hum max iterations must be at least 1");
  require(c.trajectory == "none" || c.trajectory == "csv" ||
              c.trajectory == "bin",
          "trajectory must be none, csv, or bin");

  const auto warnings = degeneracy_warnings(s_list);
  print_warnings(warnings);
  ensure_directory(c.out_dir);
  const auto start = std::chrono::steady_clock::now();

  struct Cell {
    double s;
    int n;
    double h = 0, dt = 0, eps = 0;
    HumResult<double> result;
    std::string trajectory_file;
  };
  std::vector<Cell> cells;
  for (const double s : s_list)
    for (const int n : n_list) cells.push_back({s, n});

  const fs::path dir = c.out_dir;
  const auto errors = for_each_cell(
      c.jobs, static_cast<int>(cells.size()), [&](int i) {
        auto& cell = cells[i];
        const auto problem = make_mesh(cell.s, c.L, cell.n);
        const auto grid = make_time_grid(c.horizon, c.steps);
        const auto region = make_region(problem, omega_a, omega_b);
        cell.h = problem.h;
        cell.dt = grid.dt();
        cell.eps = resolve_eps(c.eps_rule, problem.h);
        Vector<double> z0(problem.n);
        for (int j = 0; j < problem.n; ++j) z0[j] = z0_field(problem.node(j));

        const auto setup =
            make_control_setup(problem, grid, region, cell.eps, z0);
        const HumSolver<double> solver(setup);
        cell.result = solver.minimize(c.hum_tol, c.hum_max_iter);

        if (c.trajectory != "none") {
          const auto controlled = solve_forward(solver.stepper(), region, z0,
                                                cell.result.control);
          const std::string stem = "trajectory_s" + format_brief(cell.s) +
                                   "_N" + std::to_string(cell.n);
          if (c.trajectory == "csv") {
            cell.trajectory_file = stem + ".csv";
            dump_trajectory_csv(dir / cell.trajectory_file, problem, cell.dt,
                                controlled.states);
          } else {
            cell.trajectory_file = stem + ".bin";
            dump_trajectory_bin(dir / cell.trajectory_file, problem, cell.dt,
                                controlled.states);
          }
        }
      });

  std::vector<std::string> artifacts{"control.csv"};
  {
    CsvWriter csv(dir / "control.csv",
                  "s,N,h,dt,eps,cost,inf_F,terminal_norm,cg_iters");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      const bool ok = errors[i].empty();
      csv.row({format_value(cell.s), std::to_string(cell.n),
               format_value(ok ? cell.h : quiet_nan),
               format_value(ok ? cell.dt : quiet_nan),
               format_value(ok ? cell.eps : quiet_nan),
               format_value(ok ? cell.result.cost : quiet_nan),
               format_value(ok ? cell.result.optimal_energy : quiet_nan),
               format_value(ok ? cell.result.terminal_norm : quiet_nan),
               std::to_string(ok ? cell.result.cg_iterations : -1)});
    }
  }

  json cell_log = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    json entry{{"s", cell.s}, {"N", cell.n}};
    if (errors[i].empty()) {
      entry["converged"] = cell.result.converged;
      entry["cg_residual"] = cell.result.cg_residual;
      if (!cell.trajectory_file.empty()) {
        entry["trajectory"] = cell.trajectory_file;
        artifacts.push_back(cell.trajectory_file);
      }
      std::printf("[control] s=%s N=%d eps=%s cost=%s inf_F=%s terminal=%s "
                  "iters=%d%s\n",
                  format_brief(cell.s).c_str(), cell.n,
                  format_brief(cell.eps).c_str(),
                  format_brief(cell.result.cost).c_str(),
                  format_brief(cell.result.optimal_energy).c_str(),
                  format_brief(cell.result.terminal_norm).c_str(),
                  cell.result.cg_iterations,
                  cell.result.converged ? "" : " (not converged)");
      if (!cell.result.converged)
        std::cerr << "warning: s=" << format_brief(cell.s) << " N=" << cell.n
                  << ": minimizer stopped at max iterations with residual "
                  << format_brief(cell.result.cg_residual) << '\n';
    } else {
      entry["error"] = errors[i];
    }
    cell_log.push_back(entry);
  }

  json doc = base_metadata(c, warnings);
  doc["cells"] = cell_log;
  finish_metadata(doc, dir, artifacts, start);
  return report_cell_errors(errors) ? exit_numerical_failure : exit_ok;
}

// --------------------------------------------------------------------------
// eigs

int run_eigs(const RunConfig& c) {
  const auto s_list = parse_double_list(c.s_spec);
  const auto n_list = parse_int_list(c.n_spec);
  validate_s_values(s_list);
  require(c.L == 1.0,
          "eigs compares against the unit-interval asymptotic law; L must be 1");
  require(c.jobs >= 1, "jobs must be at least 1");
  require(c.eigen_count >= 1, "K must be at least 1");
  for (const int n : n_list)
    require(c.eigen_count <= n, "K must not exceed N");

  const auto warnings = degeneracy_warnings(s_list);
  print_warnings(warnings);
  ensure_directory(c.out_dir);
  const auto start = std::chrono::steady_clock::now();

  struct Cell {
    double s;
    int n;
    SpectrumReport<double> report;
  };
  std::vector<Cell> cells;
  for (const double s : s_list)
    for (const int n : n_list) cells.push_back({s, n, {}});

  const auto errors = for_each_cell(
      c.jobs, static_cast<int>(cells.size()), [&](int i) {
        auto& cell = cells[i];
        cell.report =
            discrete_spectrum(make_mesh(cell.s, c.L, cell.n), c.eigen_count);
      });

  const fs::path dir = c.out_dir;
  {
    CsvWriter csv(dir / "spectrum.csv",
                  "s,N,k,lambda_discrete,lambda_asymptotic,rel_gap");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      const bool ok = errors[i].empty();
      for (int k = 0; k < c.eigen_count; ++k) {
        const double discrete = ok ? cell.report.lambdas[k] : quiet_nan;
        const double predicted =
            asymptotic_eigenvalue(cell.s, k + 1);
        csv.row({format_value(cell.s), std::to_string(cell.n),
                 std::to_string(k + 1), format_value(discrete),
                 format_value(predicted),
                 format_value(ok ? std::abs(discrete - predicted) / predicted
                                 : quiet_nan)});
      }
    }
  }

  for (std::size_t i = 0; i < cells.size(); ++i)
    if (errors[i].empty()) {
      const auto& cell = cells[i];
      const double gap =
          std::abs(cell.report.lambdas[0] - cell.report.asymptotic[0]) /
          cell.report.asymptotic[0];
      std::printf("[eigs] s=%s N=%d lambda1=%s predicted=%s rel_gap=%s\n",
                  format_brief(cell.s).c_str(), cell.n,
                  format_brief(cell.report.lambdas[0]).c_str(),
                  format_brief(cell.report.asymptotic[0]).c_str(),
                  format_brief(gap).c_str());
    }

  json doc = base_metadata(c, warnings);
  finish_metadata(doc, dir, {"spectrum.csv"}, start);
  return report_cell_errors(errors) ? exit_numerical_failure : exit_ok;
}

}  // namespace

int run(const RunConfig& config) {
  try {
    if (config.command == "solve") return run_solve(config);
    if (config.command == "convergence") return run_convergence(config);
    if (config.command == "control") return run_control(config);
    if (config.command == "eigs") return run_eigs(config);
    std::cerr << "error: unknown command '" << config.command << "'\n";
    return exit_config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical_failure;
  }
}

}  // namespace fraclap::runner
