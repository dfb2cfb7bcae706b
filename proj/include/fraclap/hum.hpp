#pragma once

// Penalized Hilbert Uniqueness Method for the fractional heat equation.
//
// Dual functional over terminal adjoint data q (phi runs backward from q):
//   J(q) = 1/2 sum_n dt |mask phi^n|_h^2 + (eps/2) (q, q)_M + (phi^1, z0)_M
// The exact discrete duality identity (see evolution.hpp) makes its
// mass-weighted gradient
//   grad J(q) = Lambda q + eps q + z_free^M,
// where Lambda q is the terminal state of the forward problem driven by
// v^n = mask phi^n from zero data, and z_free^M is the free terminal state
// from z0.  Lambda is self-adjoint and positive semidefinite in the
// mass-weighted product, so conjugate gradient in that product solves
//   (Lambda + eps I) q = -z_free^M.
//
// Against this dual stands the primal penalized energy
//   F(v) = 1/2 sum_n dt |v^n|_h^2 + 1/(2 eps) |z^M(v)|_M^2,
// and the pair is in exact Fenchel duality: inf F = -min J, with the
// optimal terminal state z^M = -eps q*.  Reported diagnostics (cost,
// terminal norm) use the plain h-weighted norm.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include <fraclap/evolution.hpp>
#include <fraclap/mesh.hpp>

namespace fraclap {

template <typename Scalar = double>
struct ControlSetup {
  FracProblem<Scalar> problem;
  TimeGrid<Scalar> grid;
  ControlRegion<Scalar> region;
  Scalar eps{};
  Vector<Scalar> z0;
};

template <typename Scalar = double>
ControlSetup<Scalar> make_control_setup(const FracProblem<Scalar>& problem,
                                        const TimeGrid<Scalar>& grid,
                                        const ControlRegion<Scalar>& region,
                                        Scalar eps, Vector<Scalar> z0) {
  if (!(eps > Scalar(0)))
    throw std::invalid_argument("make_control_setup: eps must be positive");
  if (z0.size() != problem.n)
    throw std::invalid_argument("make_control_setup: z0 size mismatch");
  return {problem, grid, region, eps, std::move(z0)};
}

template <typename Scalar = double>
struct HumResult {
  Vector<Scalar> phiT_opt;                // minimizer q*
  std::vector<Vector<Scalar>> control;    // v^n = mask phi^n, n = 1..M
  Scalar cost = 0;                        // sqrt(sum_n dt |v^n|_h^2)
  Scalar optimal_energy = 0;              // inf F, evaluated as -J(q*)
  Scalar dual_value = 0;                  // J(q*)
  Scalar terminal_norm = 0;               // |z^M|_h under the control
  int cg_iterations = 0;
  Scalar cg_residual = 0;
  bool converged = false;
};

template <typename Scalar = double>
class HumSolver {
 public:
  explicit HumSolver(ControlSetup<Scalar> setup)
      : setup_(std::move(setup)), stepper_(setup_.problem, setup_.grid) {
    z_free_terminal_ =
        solve_forward(stepper_, setup_.region, setup_.z0, {}).states.back();
  }

  const ControlSetup<Scalar>& setup() const { return setup_; }
  const EvolutionStepper<Scalar>& stepper() const { return stepper_; }
  const Vector<Scalar>& free_terminal() const { return z_free_terminal_; }

  /// Masked adjoint history driven by q: controls[n] = mask phi^{n+1}.
  std::vector<Vector<Scalar>> control_from(const Vector<Scalar>& q) const {
    const auto adj = solve_adjoint(stepper_, q);
    std::vector<Vector<Scalar>> v(setup_.grid.steps);
    for (int n = 0; n < setup_.grid.steps; ++n)
      v[n] = setup_.region.mask.cwiseProduct(adj.states[n]);
    return v;
  }

  /// Lambda q: terminal state from zero data under the control mask phi.
  Vector<Scalar> lambda_apply(const Vector<Scalar>& q) const {
    const Vector<Scalar> zero = Vector<Scalar>::Zero(setup_.problem.n);
    return solve_forward(stepper_, setup_.region, zero, control_from(q))
        .states.back();
  }

  /// Mass-weighted gradient of J at q.
  Vector<Scalar> gradient(const Vector<Scalar>& q) const {
    Vector<Scalar> g = lambda_apply(q);
    g += setup_.eps * q;
    g += z_free_terminal_;
    return g;
  }

  /// Dual functional value.
  Scalar j_value(const Vector<Scalar>& q) const {
    const auto adj = solve_adjoint(stepper_, q);
    const Scalar dt = setup_.grid.dt();
    const Scalar h = setup_.problem.h;
    Scalar quad = 0;
    for (int n = 0; n < setup_.grid.steps; ++n)
      quad += dt * h *
              setup_.region.mask.cwiseProduct(adj.states[n]).squaredNorm();
    const auto& mass = stepper_.mass();
    return Scalar(0.5) * quad +
           Scalar(0.5) * setup_.eps * mass.inner(q, q) +
           mass.inner(adj.states.front(), setup_.z0);
  }

  /// Primal penalized energy of a control history.
  Scalar primal_energy(const std::vector<Vector<Scalar>>& control) const {
    const Scalar dt = setup_.grid.dt();
    const Scalar h = setup_.problem.h;
    Scalar track = 0;
    for (const auto& v : control) track += dt * h * v.squaredNorm();
    const Vector<Scalar> zM =
        solve_forward(stepper_, setup_.region, setup_.z0, control).states.back();
    const auto& mass = stepper_.mass();
    return Scalar(0.5) * track +
           mass.inner(zM, zM) / (Scalar(2) * setup_.eps);
  }

  /// Conjugate gradient in the mass-weighted product on
  /// (Lambda + eps I) q = -z_free^M.
  HumResult<Scalar> minimize(Scalar tol = Scalar(1e-8), int max_iter = 1000) const {
    if (!(tol > Scalar(0)))
      throw std::invalid_argument("minimize: tol must be positive");
    const auto& mass = stepper_.mass();
    const int n = setup_.problem.n;

    HumResult<Scalar> out;
    out.phiT_opt = Vector<Scalar>::Zero(n);

    const Vector<Scalar> b = -z_free_terminal_;
    const Scalar bnorm = std::sqrt(mass.inner(b, b));
    if (bnorm > Scalar(0)) {
      Vector<Scalar> r = b;
      Vector<Scalar> p = r;
      Scalar rho = mass.inner(r, r);
      for (int it = 0; it < max_iter; ++it) {
        Vector<Scalar> ap = lambda_apply(p);
        ap += setup_.eps * p;
        const Scalar denom = mass.inner(p, ap);
        if (!(denom > Scalar(0)))
          throw std::runtime_error("minimize: dual operator lost definiteness");
        const Scalar alpha = rho / denom;
        out.phiT_opt += alpha * p;
        r -= alpha * ap;
        const Scalar rho_next = mass.inner(r, r);
        out.cg_iterations = it + 1;
        if (std::sqrt(rho_next) <= tol * bnorm) {
          rho = rho_next;
          out.converged = true;
          break;
        }
        p = r + (rho_next / rho) * p;
        rho = rho_next;
      }
      out.cg_residual = std::sqrt(rho) / bnorm;
    } else {
      out.converged = true;  // zero datum: zero control is optimal
    }

    out.control = control_from(out.phiT_opt);
    const Scalar dt = setup_.grid.dt();
    const Scalar h = setup_.problem.h;
    Scalar track = 0;
    for (const auto& v : out.control) track += dt * h * v.squaredNorm();
    out.cost = std::sqrt(track);
    const Vector<Scalar> zM =
        solve_forward(stepper_, setup_.region, setup_.z0, out.control).states.back();
    out.terminal_norm = norm_h(h, zM);
    out.dual_value = j_value(out.phiT_opt);
    out.optimal_energy = -out.dual_value;
    return out;
  }

 private:
  ControlSetup<Scalar> setup_;
  EvolutionStepper<Scalar> stepper_;
  Vector<Scalar> z_free_terminal_;
};

template <typename Scalar = double>
struct ControlReport {
  Scalar s{};
  int n{};
  Scalar h{}, dt{}, eps{};
  Scalar cost{}, inf_f{}, terminal_norm{};
  int cg_iters{};
  Scalar cg_residual{};
  bool converged = false;
  bool ok = true;
};

/// One penalized-HUM experiment per (s, N): omega = (a, b), horizon T split
/// into `steps`, eps = h^eps_exponent, initial datum sampled nodally.
/// Failed cells carry NaN diagnostics and ok=false.
template <typename Scalar = double, typename Datum>
std::vector<ControlReport<Scalar>> controllability_study(
    const std::vector<Scalar>& s_list, const std::vector<int>& n_list, Scalar L,
    Scalar horizon, int steps, Scalar omega_a, Scalar omega_b,
    Scalar eps_exponent, const Datum& z0_at, Scalar tol = Scalar(1e-8),
    int max_iter = 1000) {
  std::vector<ControlReport<Scalar>> table;
  table.reserve(s_list.size() * n_list.size());
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  for (const Scalar s : s_list)
    for (const int n : n_list) {
      ControlReport<Scalar> row;
      row.s = s;
      row.n = n;
      row.cost = row.inf_f = row.terminal_norm = row.cg_residual = nan;
      try {
        const auto problem = make_mesh(s, L, n);
        row.h = problem.h;
        const auto grid = make_time_grid(horizon, steps);
        row.dt = grid.dt();
        row.eps = std::pow(problem.h, eps_exponent);
        Vector<Scalar> z0(n);
        for (int i = 0; i < n; ++i) z0[i] = z0_at(problem.node(i));
        const auto region = make_region(problem, omega_a, omega_b);
        const HumSolver<Scalar> solver(
            make_control_setup(problem, grid, region, row.eps, std::move(z0)));
        const auto result = solver.minimize(tol, max_iter);
        row.cost = result.cost;
        row.inf_f = result.optimal_energy;
        row.terminal_norm = result.terminal_norm;
        row.cg_iters = result.cg_iterations;
        row.cg_residual = result.cg_residual;
        row.converged = result.converged;
      } catch (const std::exception&) {
        row.ok = false;
      }
      table.push_back(row);
    }
  return table;
}

}  // namespace fraclap
