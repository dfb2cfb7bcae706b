#pragma once

// Fast application of the symmetric Toeplitz stiffness matrix: embed the
// first column in a circulant of twice the size, diagonalized by the FFT,
// and a plain conjugate-gradient solver built on that product.

#include <complex>
#include <stdexcept>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <fraclap/elliptic.hpp>
#include <fraclap/mesh.hpp>
#include <fraclap/stiffness.hpp>

namespace fraclap {

/// Matrix-free symmetric Toeplitz operator: y = T x in O(n log n).
template <typename Scalar = double>
class ToeplitzApply {
 public:
  explicit ToeplitzApply(const Vector<Scalar>& first_column)
      : n_(static_cast<int>(first_column.size())) {
    if (n_ < 1) throw std::invalid_argument("ToeplitzApply: empty column");
    // First column of the 2n circulant: [c_0..c_{n-1}, 0, c_{n-1}..c_1].
    Vector<std::complex<Scalar>> embedded =
        Vector<std::complex<Scalar>>::Zero(2 * n_);
    for (int i = 0; i < n_; ++i) embedded[i] = first_column[i];
    for (int i = 1; i < n_; ++i) embedded[2 * n_ - i] = first_column[i];
    Eigen::FFT<Scalar> fft;
    symbol_.resize(2 * n_);
    fft.fwd(symbol_, embedded);
  }

  int size() const { return n_; }

  Vector<Scalar> operator()(const Vector<Scalar>& x) const {
    if (x.size() != n_) throw std::invalid_argument("ToeplitzApply: size mismatch");
    Vector<std::complex<Scalar>> padded = Vector<std::complex<Scalar>>::Zero(2 * n_);
    for (int i = 0; i < n_; ++i) padded[i] = x[i];
    Eigen::FFT<Scalar> fft;
    Vector<std::complex<Scalar>> freq(2 * n_);
    fft.fwd(freq, padded);
    freq.array() *= symbol_.array();
    Vector<std::complex<Scalar>> back(2 * n_);
    fft.inv(back, freq);
    return back.head(n_).real();
  }

 private:
  int n_;
  Vector<std::complex<Scalar>> symbol_;
};

template <typename Scalar = double>
struct CgOutcome {
  Vector<Scalar> x;
  int iterations = 0;
  Scalar residual = 0;  // relative to ||b||
  bool converged = false;
};

/// Conjugate gradient for an SPD operator given as a callable.
template <typename Scalar, typename Apply>
CgOutcome<Scalar> cg_solve(const Apply& apply, const Vector<Scalar>& b,
                           Scalar tol, int max_iter) {
  CgOutcome<Scalar> out;
  out.x = Vector<Scalar>::Zero(b.size());
  const Scalar bnorm = b.norm();
  if (bnorm == Scalar(0)) {
    out.converged = true;
    return out;
  }
  Vector<Scalar> r = b;
  Vector<Scalar> p = r;
  Scalar rho = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    const Vector<Scalar> ap = apply(p);
    const Scalar denom = p.dot(ap);
    if (!(denom > Scalar(0)))
      throw std::runtime_error("cg_solve: operator lost positive definiteness");
    const Scalar alpha = rho / denom;
    out.x += alpha * p;
    r -= alpha * ap;
    const Scalar rho_next = r.squaredNorm();
    out.iterations = it + 1;
    if (std::sqrt(rho_next) <= tol * bnorm) {
      out.converged = true;
      rho = rho_next;
      break;
    }
    p = r + (rho_next / rho) * p;
    rho = rho_next;
  }
  out.residual = std::sqrt(rho) / bnorm;
  out.converged = out.converged || out.residual <= tol;
  return out;
}

/// Matrix-free elliptic solve: CG with the FFT Toeplitz product.  Agrees
/// with the dense Cholesky path to the CG tolerance.
template <typename Scalar = double>
EllipticSolution<Scalar> solve_elliptic_cg(const FracProblem<Scalar>& problem,
                                           const Vector<Scalar>& load,
                                           Scalar tol = Scalar(1e-12),
                                           int max_iter = 0) {
  if (load.size() != problem.n)
    throw std::invalid_argument("solve_elliptic_cg: load size mismatch");
  const auto stiffness = assemble_stiffness(problem);
  const ToeplitzApply<Scalar> apply(stiffness.diag_values);
  if (max_iter <= 0) max_iter = 40 * problem.n + 200;
  const auto cg = cg_solve<Scalar>([&](const Vector<Scalar>& v) { return apply(v); },
                                   load, tol, max_iter);
  if (!cg.converged)
    throw std::runtime_error("solve_elliptic_cg: CG stalled before tolerance");
  EllipticSolution<Scalar> out{problem, cg.x, cg.residual, "cg"};
  return out;
}

}  // namespace fraclap
