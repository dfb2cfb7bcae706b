#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace fraclap {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform P1 discretization of (-L, L) with homogeneous exterior condition.
/// The n unknowns live at the interior nodes x_i = -L + (i+1) h, i = 0..n-1,
/// h = 2L/(n+1); the function is pinned to zero outside the open interval,
/// so the boundary nodes never enter the algebra.
template <typename Scalar = double>
struct FracProblem {
  Scalar s{};  // fractional order in (0,1)
  Scalar L{};  // half-width of the domain
  int n{};     // number of interior nodes
  Scalar h{};  // mesh width, 2L/(n+1)

  Scalar node(int i) const { return -L + h * Scalar(i + 1); }

  // Orders this close to the endpoints still run, but 1/(s(1-s)) blows up
  // and error metrics lose meaning; callers should surface a warning.
  bool degenerate_order() const {
    return s <= Scalar(0.01) || s >= Scalar(0.99);
  }
};

template <typename Scalar = double>
FracProblem<Scalar> make_mesh(Scalar s, Scalar L, int n) {
  if (!(s > Scalar(0) && s < Scalar(1)))
    throw std::invalid_argument("make_mesh: order s must lie in (0,1)");
  if (!(L > Scalar(0)))
    throw std::invalid_argument("make_mesh: half-width L must be positive");
  if (n < 1)
    throw std::invalid_argument("make_mesh: need at least one interior node");
  FracProblem<Scalar> p;
  p.s = s;
  p.L = L;
  p.n = n;
  p.h = Scalar(2) * L / Scalar(n + 1);
  return p;
}

}  // namespace fraclap
