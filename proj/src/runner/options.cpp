#include "runner/options.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fraclap::runner {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  if (used != text.size())
    throw std::invalid_argument("trailing characters in number: '" + text + "'");
  return value;
}

int to_int(const std::string& text) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + text + "'");
  }
  if (used != text.size())
    throw std::invalid_argument("trailing characters in integer: '" + text + "'");
  return static_cast<int>(value);
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty N list");
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots));
    const int hi = to_int(text.substr(dots + 2));
    if (lo < 1 || hi < lo)
      throw std::invalid_argument("doubling range needs 1 <= start <= stop: '" +
                                  text + "'");
    std::vector<int> values;
    for (long v = lo; v <= hi; v *= 2) values.push_back(static_cast<int>(v));
    return values;
  }
  std::vector<int> values;
  for (const auto& part : split(text, ',')) {
    const int v = to_int(part);
    if (v < 1) throw std::invalid_argument("N must be positive: '" + part + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty N list");
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(to_double(part));
  if (values.empty()) throw std::invalid_argument("empty list");
  return values;
}

std::pair<double, double> parse_interval(const std::string& text) {
  const auto parts = parse_double_list(text);
  if (parts.size() != 2 || !(parts[0] < parts[1]))
    throw std::invalid_argument("interval must be 'a,b' with a < b: '" + text +
                                "'");
  return {parts[0], parts[1]};
}

std::function<double(double)> make_scalar_field(const std::string& selector) {
  if (selector == "one") return [](double) { return 1.0; };
  if (selector == "zero") return [](double) { return 0.0; };
  if (selector == "x") return [](double x) { return x; };
  if (selector.rfind("poly:", 0) == 0) {
    const auto coeffs = parse_double_list(selector.substr(5));
    return [coeffs](double x) {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
      return acc;
    };
  }
  throw std::invalid_argument("unknown field selector: '" + selector +
                              "' (expected one|zero|x|poly:c0,c1,...)");
}

std::function<double(double)> make_initial_field(const std::string& selector) {
  if (selector == "sinpi")
    return [](double x) { return std::sin(M_PI * x); };
  try {
    return make_scalar_field(selector);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("unknown initial-datum selector: '" + selector +
                                "' (expected sinpi|one|zero|x|poly:c0,c1,...)");
  }
}

double resolve_eps(const std::string& rule, double h) {
  if (rule == "h") return h;
  if (rule.rfind("h^", 0) == 0) {
    const double alpha = to_double(rule.substr(2));
    return std::pow(h, alpha);
  }
  const double value = to_double(rule);
  if (!(value > 0.0))
    throw std::invalid_argument("eps must be positive: '" + rule + "'");
  return value;
}

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

void apply_config_file(RunConfig& config, const std::string& path,
                       const std::set<std::string>& cli_given) {
  std::ifstream file(path);
  if (!file)
    throw std::invalid_argument("cannot read config file: '" + path + "'");

  std::string line;
  int line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_number) +
                                  ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(line_number) +
                                  ": empty key");
    if (cli_given.count(key)) continue;  // command line wins

    if (key == "L") config.L = to_double(value);
    else if (key == "s") config.s_spec = value;
    else if (key == "N") config.n_spec = value;
    else if (key == "out") config.out_dir = value;
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "jobs") config.jobs = to_int(value);
    else if (key == "f") config.f_selector = value;
    else if (key == "solver") config.solver = value;
    else if (key == "cg-tol") config.cg_tol = to_double(value);
    else if (key == "T") config.horizon = to_double(value);
    else if (key == "M") config.steps = to_int(value);
    else if (key == "omega") config.omega_spec = value;
    else if (key == "eps") config.eps_rule = value;
    else if (key == "z0") config.z0_selector = value;
    else if (key == "tol") config.hum_tol = to_double(value);
    else if (key == "max-iter") config.hum_max_iter = to_int(value);
    else if (key == "trajectory") config.trajectory = value;
    else if (key == "K") config.eigen_count = to_int(value);
    else
      throw std::invalid_argument(path + ":" + std::to_string(line_number) +
                                  ": unknown key '" + key + "'");
  }
}

}  // namespace fraclap::runner
