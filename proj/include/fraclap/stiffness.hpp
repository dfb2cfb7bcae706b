#pragma once

#include <cmath>
#include <cstdlib>
#include <type_traits>

#include "fraclap/mesh.hpp"

namespace fraclap {

namespace detail {

// Internal evaluation type: one step wider than the request, because the
// k >= 2 entry is a fourth-order difference that cancels ~4*log10(k) digits.
template <typename Scalar>
struct wider {
  using type = Scalar;
};
template <>
struct wider<double> {
  using type = long double;
};
template <>
struct wider<float> {
  using type = double;
};

// (x^e - 1)/e, which tends to log(x) as e -> 0.  Evaluating through expm1
// keeps the k = 0, 1 entries and the difference stencil exact across the
// removable singularity at s = 1/2 (where e = 1 - 2s vanishes).
template <typename W>
W powm1_over(W x, W e) {
  if (e == W(0)) return std::log(x);
  return std::expm1(e * std::log(x)) / e;
}

// x^2 (x^e - 1)/e with the x = 0 limit filled in (only hit at k = 2).
template <typename W>
W stencil_term(W x, W e) {
  if (x == W(0)) return W(0);
  return x * x * powm1_over(x, e);
}

// Reduced fourth difference 4 t(k+1) + 4 t(k-1) - 6 t(k) - t(k+2) - t(k-2)
// of t(x) = x^2 (x^e - 1)/e.  Algebraically equal to the raw difference of
// x^{3-2s} divided by (1 - 2s), since the stencil annihilates quadratics.
template <typename W>
W reduced_difference(int k, W e) {
  return W(4) * stencil_term(W(k + 1), e) + W(4) * stencil_term(W(k - 1), e) -
         W(6) * stencil_term(W(k), e) - stencil_term(W(k + 2), e) -
         stencil_term(W(k - 2), e);
}

// Asymptotic form of the same reduced difference for large k.  Expanding
// x^{beta} about k, the stencil kills every moment below 4, leaving
//   sum over even m >= 4 of (8 - 2^{m+1}) C(beta, m) k^{beta - m},
// and the binomial factor C(beta, m) carries exactly one (beta - 2) = 1-2s
// factor, which cancels against the reduction.  Five terms keep the
// truncation error below ~1e-11 relative at k = 20 uniformly in s.
template <typename W>
W reduced_difference_tail(int k, W beta) {
  W coeff[5];
  for (int idx = 0; idx < 5; ++idx) {
    const int m = 4 + 2 * idx;
    W prod = 1;
    for (int r = 0; r < m; ++r) {
      if (r == 2) continue;  // the (beta - 2) factor already cancelled
      prod *= beta - W(r);
    }
    W factorial = 1;
    for (int j = 2; j <= m; ++j) factorial *= W(j);
    const W eight_minus = W(8) - std::ldexp(W(2), m);  // 8 - 2^{m+1}
    coeff[idx] = eight_minus * prod / factorial;
  }
  const W x = W(1) / (W(k) * W(k));
  W horner = coeff[4];
  for (int idx = 3; idx >= 0; --idx) horner = coeff[idx] + x * horner;
  return horner * std::pow(W(k), beta - W(4));
}

// Direct evaluation stays accurate up to here; beyond it the asymptotic
// series is the tighter of the two.  At the switch index both agree to
// ~1e-10 relative (checked by the calibration test).
inline constexpr int stencil_switch_k = 20;

}  // namespace detail

/// Closed-form value of the unnormalized interaction integral
///   a(k) = integral of (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) / |x-y|^{1+2s}
/// over R^2, for tent functions a distance k = |i-j| apart on a uniform mesh
/// of width h.  The h-dependence is the pure factor h^{1-2s}; at s = 1/2 the
/// value is h-independent (a(0) = 8 ln 2, a(1) = 9 ln 3 - 16 ln 2, ...).
/// The c_{1,s}/2 normalization of the operator is applied at assembly, not
/// here.
template <typename Scalar = double>
Scalar stiffness_entry(Scalar s, Scalar h, int k) {
  if (!(s > Scalar(0) && s < Scalar(1)))
    throw std::invalid_argument("stiffness_entry: order s must lie in (0,1)");
  if (!(h > Scalar(0)))
    throw std::invalid_argument("stiffness_entry: mesh width must be positive");
  if (k < 0) throw std::invalid_argument("stiffness_entry: lag k must be >= 0");

  using W = typename detail::wider<Scalar>::type;
  const W ws = W(s);
  const W e = W(1) - W(2) * ws;              // vanishes exactly at s = 1/2
  const W denom = W(2) * ws * (W(1) - ws) * (W(3) - W(2) * ws);
  const W hfac = std::pow(W(h), e);

  W unit;  // value at h = 1
  if (k == 0) {
    unit = W(8) * detail::powm1_over(W(2), e) / denom;
  } else if (k == 1) {
    unit = (W(9) * detail::powm1_over(W(3), e) -
            W(16) * detail::powm1_over(W(2), e)) /
           denom;
  } else if (k <= detail::stencil_switch_k) {
    unit = -detail::reduced_difference(k, e) / denom;
  } else {
    const W beta = W(3) - W(2) * ws;
    unit = -detail::reduced_difference_tail(k, beta) / denom;
  }
  return Scalar(hfac * unit);
}

/// Normalization constant of the integral fractional Laplacian,
///   c_{1,s} = s 4^s Gamma((1+2s)/2) / (sqrt(pi) Gamma(1-s)).
template <typename Scalar = double>
Scalar normalization_constant(Scalar s) {
  using std::sqrt;
  using std::tgamma;
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  return s * std::pow(Scalar(2), Scalar(2) * s) * tgamma(s + Scalar(0.5)) /
         (sqrt(pi) * tgamma(Scalar(1) - s));
}

/// Dense symmetric Toeplitz stiffness matrix.  diag_values[k] holds the
/// normalized entry for lag k, i.e. (c_{1,s}/2) times the closed form, so
/// entry (i,j) = diag_values[|i-j|] already discretizes the full operator.
template <typename Scalar = double>
struct StiffnessMatrix {
  Scalar s{};
  Scalar h{};
  Vector<Scalar> diag_values;

  int size() const { return int(diag_values.size()); }

  Scalar entry(int i, int j) const { return diag_values[std::abs(i - j)]; }

  Matrix<Scalar> dense() const {
    const int n = size();
    Matrix<Scalar> A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = diag_values[std::abs(i - j)];
    return A;
  }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    const int n = size();
    Vector<Scalar> y = Vector<Scalar>::Zero(n);
    for (int i = 0; i < n; ++i) {
      Scalar acc = 0;
      for (int j = 0; j < n; ++j) acc += diag_values[std::abs(i - j)] * x[j];
      y[i] = acc;
    }
    return y;
  }
};

/// Assemble the Galerkin matrix of the bilinear form: the closed-form lag
/// values scaled once by c_{1,s}/2.  O(n) distinct values, O(1) each.
template <typename Scalar = double>
StiffnessMatrix<Scalar> assemble_stiffness(const FracProblem<Scalar>& p) {
  StiffnessMatrix<Scalar> A;
  A.s = p.s;
  A.h = p.h;
  A.diag_values.resize(p.n);
  const Scalar half_c = normalization_constant(p.s) / Scalar(2);
  for (int k = 0; k < p.n; ++k)
    A.diag_values[k] = half_c * stiffness_entry(p.s, p.h, k);
  return A;
}

}  // namespace fraclap
