#pragma once
// Generalized eigenvalues of the stiffness/mass pencil and the closed-form
// asymptotic prediction lambda_k ~ ((k pi)/2 - (1-s) pi/4)^{2s} on (-1, 1).

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include <fraclap/assembly.hpp>
#include <fraclap/stiffness.hpp>

namespace fraclap {

/// First K eigenvalues of A x = lambda M x together with the asymptotic law.
template <typename Scalar = double>
struct SpectrumReport {
  Scalar s{};
  int n{};
  Vector<Scalar> lambdas;     ///< ascending discrete eigenvalues, size K
  Vector<Scalar> asymptotic;  ///< predicted values for the same indices
};

/// Asymptotic eigenvalue prediction for the unit interval, 1-based index k.
template <typename Scalar = double>
Scalar asymptotic_eigenvalue(Scalar s, int k) {
  if (k < 1) throw std::invalid_argument("asymptotic_eigenvalue: k >= 1");
  const Scalar pi = Scalar(M_PI);
  const Scalar base = Scalar(k) * pi / Scalar(2) - (Scalar(1) - s) * pi / Scalar(4);
  return std::pow(base, Scalar(2) * s);
}

/// K smallest generalized eigenvalues of the assembled pencil.  The
/// asymptotic comparison column is only meaningful on (-1, 1), so L = 1 is
/// required.
template <typename Scalar = double>
SpectrumReport<Scalar> discrete_spectrum(const FracProblem<Scalar>& problem,
                                         int count) {
  if (count < 1 || count > problem.n)
    throw std::invalid_argument("discrete_spectrum: need 1 <= count <= N");
  if (problem.L != Scalar(1))
    throw std::invalid_argument(
        "discrete_spectrum: asymptotic comparison requires L = 1");

  const Matrix<Scalar> a = assemble_stiffness(problem).dense();
  const Matrix<Scalar> m = assemble_mass(problem).dense();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix<Scalar>> solver(a, m,
                                                                  Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("discrete_spectrum: eigensolver failed");

  SpectrumReport<Scalar> report{problem.s, problem.n,
                                solver.eigenvalues().head(count),
                                Vector<Scalar>(count)};
  for (int k = 1; k <= count; ++k)
    report.asymptotic[k - 1] = asymptotic_eigenvalue(problem.s, k);
  return report;
}

/// Running partial sums of 1/lambda_k (the summability witness: bounded for
/// large s, growing without visible ceiling for small s).
template <typename Scalar = double>
Vector<Scalar> reciprocal_partial_sums(const Vector<Scalar>& lambdas) {
  Vector<Scalar> sums(lambdas.size());
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > Scalar(0)))
      throw std::invalid_argument("reciprocal_partial_sums: eigenvalues must be positive");
    acc += Scalar(1) / lambdas[i];
    sums[i] = acc;
  }
  return sums;
}

}  // namespace fraclap
