#pragma once

// Dirichlet problem for the integral fractional Laplacian on (-L, L):
// solve the Galerkin system A u = F and measure errors against the exact
// solution of the unit-load problem, u(x) = C(s) (L^2 - x^2)^s.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <fraclap/assembly.hpp>
#include <fraclap/mesh.hpp>
#include <fraclap/stiffness.hpp>

namespace fraclap {

template <typename Scalar = double>
struct EllipticSolution {
  FracProblem<Scalar> problem;
  Vector<Scalar> coeffs;  // nodal values u_1..u_N; zero outside (-L, L)
  Scalar residual = 0;    // ||A u - F||_2 / ||F||_2
  std::string solver;     // "cholesky" or "cg"
};

/// Exact solution of (-d_x^2)^s u = 1 on (-L, L), zero outside.
template <typename Scalar = double>
Scalar exact_solution(Scalar s, Scalar L, Scalar x) {
  if (!(s > Scalar(0) && s < Scalar(1)))
    throw std::invalid_argument("exact_solution: s must lie in (0, 1)");
  if (std::abs(x) > L)
    throw std::domain_error("exact_solution: |x| > L");
  const Scalar amp = std::pow(Scalar(2), Scalar(-2) * s) *
                     std::sqrt(Scalar(M_PI)) /
                     (std::tgamma((Scalar(1) + Scalar(2) * s) / Scalar(2)) *
                      std::tgamma(Scalar(1) + s));
  const Scalar gap = std::max(Scalar(0), (L - x) * (L + x));
  return amp * std::pow(gap, s);
}

/// Closed form of the integral of the exact solution over (-L, L).
template <typename Scalar = double>
Scalar exact_integral(Scalar s, Scalar L) {
  if (!(s > Scalar(0) && s < Scalar(1)))
    throw std::invalid_argument("exact_integral: s must lie in (0, 1)");
  return Scalar(M_PI) * std::pow(L, Scalar(2) * s + Scalar(1)) /
         (std::pow(Scalar(4), s) * std::tgamma(s + Scalar(0.5)) *
          std::tgamma(s + Scalar(1.5)));
}

/// Direct (dense Cholesky) solve of A u = F.
template <typename Scalar = double>
EllipticSolution<Scalar> solve_elliptic(const FracProblem<Scalar>& problem,
                                        const Vector<Scalar>& load) {
  if (load.size() != problem.n)
    throw std::invalid_argument("solve_elliptic: load size mismatch");
  const auto stiffness = assemble_stiffness(problem);
  const Matrix<Scalar> dense = stiffness.dense();
  const Eigen::LLT<Matrix<Scalar>> llt(dense);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_elliptic: stiffness matrix not SPD");
  EllipticSolution<Scalar> out{problem, llt.solve(load), Scalar(0), "cholesky"};
  const Scalar fnorm = load.norm();
  out.residual = fnorm == Scalar(0) ? (dense * out.coeffs).norm()
                                    : (dense * out.coeffs - load).norm() / fnorm;
  return out;
}

/// Energy-norm error for the unit-load solve, via Galerkin orthogonality:
/// ||u - u_h||^2 = integral of u minus integral of u_h, the latter exact
/// for P1 with zero boundary: h * sum of coefficients.
template <typename Scalar = double>
Scalar hs_error(const EllipticSolution<Scalar>& solution) {
  const auto& p = solution.problem;
  const Scalar exact = exact_integral(p.s, p.L);
  const Scalar discrete = p.h * solution.coeffs.sum();
  const Scalar gap = exact - discrete;
  const Scalar guard = Scalar(1e-10) * std::max(Scalar(1), exact);
  if (gap < -guard)
    throw std::runtime_error(
        "hs_error: discrete energy exceeds the exact energy; the solve is "
        "inconsistent with a unit load");
  return std::sqrt(std::max(Scalar(0), gap));
}

/// Maximum nodal deviation from the exact unit-load solution.
template <typename Scalar = double>
Scalar linf_error(const EllipticSolution<Scalar>& solution) {
  const auto& p = solution.problem;
  Scalar worst = 0;
  for (int i = 0; i < p.n; ++i)
    worst = std::max(worst,
                     std::abs(solution.coeffs[i] - exact_solution(p.s, p.L, p.node(i))));
  return worst;
}

template <typename Scalar = double>
struct ErrorReport {
  Scalar s;
  int n;
  Scalar h;
  Scalar hs_err;
  Scalar linf_err;
  Scalar residual;
  bool ok = true;
};

/// Unit-load refinement study: one report per (s, N), errors measured
/// against the exact solution.  Failed cells carry NaN errors and ok=false.
template <typename Scalar = double>
std::vector<ErrorReport<Scalar>> convergence_study(const std::vector<Scalar>& s_list,
                                                   const std::vector<int>& n_list,
                                                   Scalar L = Scalar(1)) {
  std::vector<ErrorReport<Scalar>> table;
  table.reserve(s_list.size() * n_list.size());
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  for (const Scalar s : s_list)
    for (const int n : n_list) {
      const auto problem = make_mesh(s, L, n);
      ErrorReport<Scalar> row{s, n, problem.h, nan, nan, nan, true};
      try {
        Vector<Scalar> load = Vector<Scalar>::Constant(n, problem.h);
        const auto solution = solve_elliptic(problem, load);
        row.hs_err = hs_error(solution);
        row.linf_err = linf_error(solution);
        row.residual = solution.residual;
      } catch (const std::exception&) {
        row.ok = false;
      }
      table.push_back(row);
    }
  return table;
}

/// Least-squares slope of log10(y) against log10(h): the convergence rate.
template <typename Scalar = double>
Scalar loglog_slope(const std::vector<Scalar>& h, const std::vector<Scalar>& y) {
  if (h.size() != y.size() || h.size() < 2)
    throw std::invalid_argument("loglog_slope: need two or more matched points");
  const int m = static_cast<int>(h.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const Scalar lx = std::log10(h[i]);
    const Scalar ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (Scalar(m) * sxy - sx * sy) / (Scalar(m) * sxx - sx * sx);
}

}  // namespace fraclap
