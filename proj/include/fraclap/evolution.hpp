#pragma once

// Implicit-Euler time stepping for the fractional heat equation: controlled
// forward dynamics and the homogeneous backward adjoint, both driven by one
// Cholesky factorization of (M + dt * A).
//
// Conventions (fixed by the exact discrete duality identity below):
//   forward : (M + dt A) z^{n+1} = M z^n + dt * h * (mask .* v^{n+1})
//   adjoint : (M + dt A) phi^n   = M phi^{n+1}
// With the control injected through the diagonal weight h * mask, summation
// by parts telescopes exactly:
//   sum_{n=1..M} dt (v^n, mask phi^n)_h = (z^M, phi^{M+1})_M - (z^0, phi^1)_M
// where (u,v)_h = h u.v and (u,v)_M = u.(M v).  The identity holds to
// machine precision for every choice of data, which is what the adjoint
// optimization layer relies on.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <fraclap/assembly.hpp>
#include <fraclap/mesh.hpp>
#include <fraclap/stiffness.hpp>

namespace fraclap {

template <typename Scalar = double>
struct TimeGrid {
  Scalar horizon{};  // T
  int steps{};       // M
  Scalar dt() const { return horizon / Scalar(steps); }
};

template <typename Scalar = double>
TimeGrid<Scalar> make_time_grid(Scalar horizon, int steps) {
  if (!(horizon > Scalar(0)))
    throw std::invalid_argument("make_time_grid: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("make_time_grid: steps must be >= 1");
  return {horizon, steps};
}

/// Control region omega = (a, b): nodes strictly inside are active.
template <typename Scalar = double>
struct ControlRegion {
  Scalar a{}, b{};
  std::vector<int> active;
  Vector<Scalar> mask;  // 0/1 per node
};

template <typename Scalar = double>
ControlRegion<Scalar> make_region(const FracProblem<Scalar>& problem, Scalar a,
                                  Scalar b) {
  if (!(a >= -problem.L && a < b && b <= problem.L))
    throw std::invalid_argument("make_region: need -L <= a < b <= L");
  ControlRegion<Scalar> region{a, b, {}, Vector<Scalar>::Zero(problem.n)};
  // A node within a rounding whisker of an endpoint counts as on the
  // boundary, hence outside the open interval.
  const Scalar snap = Scalar(1e-9) * problem.h;
  for (int i = 0; i < problem.n; ++i) {
    const Scalar x = problem.node(i);
    if (x > a + snap && x < b - snap) {
      region.active.push_back(i);
      region.mask[i] = Scalar(1);
    }
  }
  if (region.active.empty())
    throw std::invalid_argument("make_region: no mesh node falls inside (a, b)");
  return region;
}

/// States z^0..z^M in time order (for the adjoint, states[i] holds
/// phi^{i+1}, so states.front() = phi^1 and states.back() = phi^{M+1}).
template <typename Scalar = double>
struct Trajectory {
  TimeGrid<Scalar> grid;
  std::vector<Vector<Scalar>> states;
};

/// Shared implicit-Euler engine: factors (M + dt A) once and serves both
/// time directions.
template <typename Scalar = double>
class EvolutionStepper {
 public:
  EvolutionStepper(const FracProblem<Scalar>& problem, const TimeGrid<Scalar>& grid)
      : problem_(problem), grid_(grid), mass_(assemble_mass(problem)) {
    Matrix<Scalar> system = assemble_stiffness(problem).dense();
    system *= grid.dt();
    system += mass_.dense();
    llt_.compute(system);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("EvolutionStepper: system matrix not SPD");
  }

  const FracProblem<Scalar>& problem() const { return problem_; }
  const TimeGrid<Scalar>& grid() const { return grid_; }
  const MassMatrix<Scalar>& mass() const { return mass_; }

  /// One controlled step: source is the already-masked nodal control.
  Vector<Scalar> step_forward(const Vector<Scalar>& z,
                              const Vector<Scalar>& masked_source) const {
    Vector<Scalar> rhs = mass_.apply(z);
    rhs += (grid_.dt() * problem_.h) * masked_source;
    return llt_.solve(rhs);
  }

  /// One homogeneous step (shared by the free forward flow and, run in
  /// reverse index order, the adjoint).
  Vector<Scalar> step_free(const Vector<Scalar>& state) const {
    return llt_.solve(mass_.apply(state));
  }

 private:
  FracProblem<Scalar> problem_;
  TimeGrid<Scalar> grid_;
  MassMatrix<Scalar> mass_;
  Eigen::LLT<Matrix<Scalar>> llt_;
};

/// Forward flow under a given control history v^1..v^M (controls[n] drives
/// the step n -> n+1; an empty control list means free dynamics).
template <typename Scalar = double>
Trajectory<Scalar> solve_forward(const EvolutionStepper<Scalar>& stepper,
                                 const ControlRegion<Scalar>& region,
                                 const Vector<Scalar>& z0,
                                 const std::vector<Vector<Scalar>>& controls) {
  const int n = stepper.problem().n;
  const int steps = stepper.grid().steps;
  if (z0.size() != n) throw std::invalid_argument("solve_forward: z0 size mismatch");
  if (!controls.empty() && static_cast<int>(controls.size()) != steps)
    throw std::invalid_argument("solve_forward: need one control per step");
  Trajectory<Scalar> out{stepper.grid(), {}};
  out.states.reserve(steps + 1);
  out.states.push_back(z0);
  Vector<Scalar> masked(n);
  for (int step = 0; step < steps; ++step) {
    if (controls.empty()) {
      out.states.push_back(stepper.step_free(out.states.back()));
    } else {
      if (controls[step].size() != n)
        throw std::invalid_argument("solve_forward: control size mismatch");
      masked = region.mask.cwiseProduct(controls[step]);
      out.states.push_back(stepper.step_forward(out.states.back(), masked));
    }
  }
  return out;
}

/// Backward adjoint flow from the terminal datum phi^{M+1}.
template <typename Scalar = double>
Trajectory<Scalar> solve_adjoint(const EvolutionStepper<Scalar>& stepper,
                                 const Vector<Scalar>& phi_terminal) {
  const int n = stepper.problem().n;
  const int steps = stepper.grid().steps;
  if (phi_terminal.size() != n)
    throw std::invalid_argument("solve_adjoint: terminal datum size mismatch");
  Trajectory<Scalar> out{stepper.grid(), {}};
  out.states.assign(steps + 1, Vector<Scalar>());
  out.states[steps] = phi_terminal;
  for (int idx = steps; idx > 0; --idx)
    out.states[idx - 1] = stepper.step_free(out.states[idx]);
  return out;
}

/// h-weighted discrete L2 inner product and norm.
template <typename Scalar = double>
Scalar inner_h(Scalar h, const Vector<Scalar>& u, const Vector<Scalar>& v) {
  return h * u.dot(v);
}

template <typename Scalar = double>
Scalar norm_h(Scalar h, const Vector<Scalar>& u) {
  return std::sqrt(h) * u.norm();
}

}  // namespace fraclap
