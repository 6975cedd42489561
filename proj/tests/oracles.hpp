// Independent numerical references shared by the unit and acceptance tests.
#pragma once

#include "mulink/rng.hpp"
#include "mulink/types.hpp"

#include <functional>

namespace mulink::oracle {

inline CMatrix random_gaussian(int r, int c, Rng& rng) {
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = complex_gaussian(rng, 1.0);
  return m;
}

// Adaptive Simpson on a matrix-valued integrand; error measured in max norm.
using MatFn = std::function<RMatrix(double)>;

inline RMatrix simpson_step(const MatFn& f, double a, double b, const RMatrix& fa, const RMatrix& fm, const RMatrix& fb,
                     const RMatrix& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const RMatrix flm = f(lm);
  const RMatrix frm = f(rm);
  const RMatrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const RMatrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const RMatrix diff = left + right - whole;
  if (depth <= 0 || diff.cwiseAbs().maxCoeff() <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// (1 / (b - a)) * integral of f over [a, b].
inline RMatrix mean_over(const MatFn& f, double a, double b, double tol = 1e-13) {
  const RMatrix fa = f(a);
  const RMatrix fb = f(b);
  const RMatrix fm = f(0.5 * (a + b));
  const RMatrix whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol * (b - a), 40) / (b - a);
}

inline RMatrix rotation(double psi, int l, int m, int n) {
  RMatrix g = RMatrix::Identity(n, n);
  g(l, l) = g(m, m) = std::cos(psi);
  g(l, m) = std::sin(psi);
  g(m, l) = -std::sin(psi);
  return g;
}

template <class A, class B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(const A& a, const B& b) {
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// E[e^{j phi}] for phi uniform on [c - d, c + d], by quadrature.
inline cplx phase_mean(double c, double d) {
  const RMatrix v = mean_over(
      [](double p) {
        RMatrix r(1, 2);
        r << std::cos(p), std::sin(p);
        return r;
      },
      c - d, c + d);
  return {v(0, 0), v(0, 1)};
}

}  // namespace mulink::oracle
