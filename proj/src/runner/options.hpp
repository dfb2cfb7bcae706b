#pragma once
// Run configuration shared by the command-line driver: every parameter a
// command needs, plus the small parsers that turn flag strings into values.

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace fraclap::runner {

/// Fully resolved parameters for one invocation.  Serialized verbatim into
/// the run metadata so an artifact directory is self-describing.
struct RunConfig {
  std::string command;      // solve | convergence | control | eigs
  std::string config_file;  // optional key=value file already applied

  // Shared across commands.
  double L = 1.0;
  std::string s_spec = "0.5";     // comma list
  std::string n_spec = "50";      // comma list or "a..b" doubling
  std::string out_dir = "out";
  unsigned long long seed = 0;
  int jobs = 1;

  // Elliptic solve / convergence.
  std::string f_selector = "one";   // one | zero | x | poly:c0,c1,...
  std::string solver = "direct";    // direct | cg
  double cg_tol = 1e-12;

  // Evolution / control.
  double horizon = 0.3;
  int steps = 2000;
  std::string omega_spec = "-0.3,0.8";
  std::string eps_rule = "h";       // h | h^alpha | positive literal
  std::string z0_selector = "sinpi";  // sinpi | one | zero | x | poly:...
  double hum_tol = 1e-8;
  int hum_max_iter = 1000;
  std::string trajectory = "none";  // none | csv | bin

  // Spectrum.
  int eigen_count = 10;
};

/// "16,32,64" or the doubling shorthand "16..1024" (start doubles while it
/// stays within the bound).  Throws std::invalid_argument on bad input.
std::vector<int> parse_int_list(const std::string& text);

/// "0.1,0.3,0.5" -> values.  Throws std::invalid_argument on bad input.
std::vector<double> parse_double_list(const std::string& text);

/// "a,b" with a < b.
std::pair<double, double> parse_interval(const std::string& text);

/// Named right-hand sides: one, zero, x, poly:c0,c1,...
std::function<double(double)> make_scalar_field(const std::string& selector);

/// Initial-datum selectors: the scalar fields plus sinpi = sin(pi x).
std::function<double(double)> make_initial_field(const std::string& selector);

/// Penalty rule: "h" -> h, "h^a" -> h**a, otherwise a positive literal.
double resolve_eps(const std::string& rule, double h);

/// Applies a flat key=value config file to the fields of `config`.  Keys are
/// the long option names without dashes (s, N, f, T, omega, max-iter, ...);
/// `#`/`;` start comments.  Keys listed in `cli_given` were set explicitly
/// on the command line and win over the file.  Throws std::invalid_argument
/// for unreadable files, malformed lines, or unknown keys.
void apply_config_file(RunConfig& config, const std::string& path,
                       const std::set<std::string>& cli_given);

}  // namespace fraclap::runner
