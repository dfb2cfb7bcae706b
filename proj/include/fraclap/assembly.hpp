#pragma once

#include <functional>

#include "fraclap/mesh.hpp"

namespace fraclap {

/// Tridiagonal P1 mass matrix: 2h/3 on the main diagonal, h/6 off it.
template <typename Scalar = double>
struct MassMatrix {
  int n{};
  Scalar h{};

  Scalar main() const { return Scalar(2) * h / Scalar(3); }
  Scalar off() const { return h / Scalar(6); }

  Matrix<Scalar> dense() const {
    Matrix<Scalar> M = Matrix<Scalar>::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      M(i, i) = main();
      if (i + 1 < n) {
        M(i, i + 1) = off();
        M(i + 1, i) = off();
      }
    }
    return M;
  }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    Vector<Scalar> y(n);
    for (int i = 0; i < n; ++i) {
      Scalar acc = main() * x[i];
      if (i > 0) acc += off() * x[i - 1];
      if (i + 1 < n) acc += off() * x[i + 1];
      y[i] = acc;
    }
    return y;
  }

  /// True L2 inner product of the P1 functions with these coefficients.
  Scalar inner(const Vector<Scalar>& a, const Vector<Scalar>& b) const {
    return a.dot(apply(b));
  }
};

template <typename Scalar = double>
MassMatrix<Scalar> assemble_mass(const FracProblem<Scalar>& p) {
  return MassMatrix<Scalar>{p.n, p.h};
}

/// Load vector F_i = integral of f * phi_i, by 3-point Gauss-Legendre on
/// each of the two elements under the tent.  Exact for polynomial f up to
/// degree 4 paired with the linear tent factor.
template <typename Scalar = double>
Vector<Scalar> assemble_load(const FracProblem<Scalar>& p,
                             const std::function<Scalar(Scalar)>& f) {
  // Nodes/weights on [-1, 1].
  const Scalar g = std::sqrt(Scalar(3) / Scalar(5));
  const Scalar gauss_x[3] = {-g, Scalar(0), g};
  const Scalar gauss_w[3] = {Scalar(5) / 9, Scalar(8) / 9, Scalar(5) / 9};

  Vector<Scalar> F = Vector<Scalar>::Zero(p.n);
  const Scalar half = p.h / Scalar(2);
  for (int i = 0; i < p.n; ++i) {
    const Scalar xi = p.node(i);
    Scalar acc = 0;
    // Rising flank on [x_{i-1}, x_i], falling flank on [x_i, x_{i+1}].
    for (int side = 0; side < 2; ++side) {
      const Scalar a = side == 0 ? xi - p.h : xi;
      const Scalar mid = a + half;
      for (int q = 0; q < 3; ++q) {
        const Scalar x = mid + half * gauss_x[q];
        const Scalar tent = side == 0 ? (x - a) / p.h : Scalar(1) - (x - a) / p.h;
        acc += gauss_w[q] * half * f(x) * tent;
      }
    }
    F[i] = acc;
  }
  return F;
}

}  // namespace fraclap
