// SPDX-License-Identifier: Apache-2.0
//
// Expected interuser leakage under uniform angle-quantization errors.
//
// With V~ = M I~ and M = D_0 G(0,1) ... G(0,N-1) D_1 ... (see feedback.hpp),
//
//   vec(M* A M) = (M^T (x) M*) vec(A),   E[M^T (x) M*] = E_k ... E_1,
//
// where E_i = E[F_i^T (x) F_i*] for the i-th factor F_i and all angles are
// independent and uniform in their bins. Vectorization is column-major.
#pragma once

#include "mulink/feedback.hpp"
#include "mulink/rng.hpp"
#include "mulink/types.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

// sin(x)/x, accurate near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// Diagonal of E[D^T (x) D*] for D = diag(1_l, e^{j phi_l}, ..., e^{j phi_{N-1}}),
// phi_i uniform on [phi^_i - delta, phi^_i + delta]. Entry a*N + b holds
// E[D_aa conj(D_bb)].
inline CVector expected_phase_kron_diagonal(std::span<const double> phi_hat, double delta, int l, int n) {
  if (l < 0 || l >= n || static_cast<int>(phi_hat.size()) != n - l)
    throw std::invalid_argument("phase vector length must be N - l");
  const double s = sinc(delta);
  std::vector<cplx> mean(static_cast<std::size_t>(n), cplx(1.0, 0.0));
  for (int i = l; i < n; ++i) mean[static_cast<std::size_t>(i)] = std::polar(s, phi_hat[static_cast<std::size_t>(i - l)]);
  CVector d(n * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      cplx v;
      if (a == b) {
        v = 1.0;
      } else {
        v = mean[static_cast<std::size_t>(a)] * std::conj(mean[static_cast<std::size_t>(b)]);
      }
      d(a * n + b) = v;
    }
  }
  return d;
}

inline CMatrix expected_phase_kron(std::span<const double> phi_hat, double delta, int l, int n) {
  return expected_phase_kron_diagonal(phi_hat, delta, l, n).asDiagonal();
}

// E[G^T], E[cos psi G^T] and E[sin psi G^T] for psi uniform on
// [psi^ - eps, psi^ + eps]; G = G(l, m) acting in an N-dimensional space.
struct RotationKernels {
  RMatrix plain;
  RMatrix cosine;
  RMatrix sine;
};

inline RotationKernels rotation_kernels(double psi_hat, double eps, int l, int m, int n) {
  if (l < 0 || m <= l || m >= n) throw std::invalid_argument("rotation needs 0 <= l < m < N");
  const double s = sinc(eps);
  const double c = std::cos(psi_hat);
  const double sn = std::sin(psi_hat);
  const double ec = c * s;                                     // E cos
  const double es = sn * s;                                    // E sin
  const double ecc = 0.5 * (1.0 + std::cos(eps) * s * std::cos(2.0 * psi_hat));  // E cos^2
  const double ess = 0.5 * (1.0 - std::cos(eps) * s * std::cos(2.0 * psi_hat));  // E sin^2
  const double ecs = std::cos(eps) * s * c * sn;               // E cos sin

  RotationKernels k{RMatrix::Identity(n, n), RMatrix::Identity(n, n) * ec, RMatrix::Identity(n, n) * es};
  k.plain(l, l) = k.plain(m, m) = ec;
  k.plain(l, m) = -es;
  k.plain(m, l) = es;

  k.cosine(l, l) = k.cosine(m, m) = ecc;
  k.cosine(l, m) = -ecs;
  k.cosine(m, l) = ecs;

  k.sine(l, l) = k.sine(m, m) = ecs;
  k.sine(l, m) = -ess;
  k.sine(m, l) = ess;
  return k;
}

// E[G^T (x) G*] (G real) as an N^2 x N^2 block matrix.
inline RMatrix expected_rotation_kron(double psi_hat, double eps, int l, int m, int n) {
  const RotationKernels k = rotation_kernels(psi_hat, eps, l, m, n);
  RMatrix w = RMatrix::Zero(n * n, n * n);
  for (int a = 0; a < n; ++a) {
    if (a == l || a == m) continue;
    w.block(a * n, a * n, n, n) = k.plain;
  }
  w.block(l * n, l * n, n, n) = k.cosine;
  w.block(m * n, m * n, n, n) = k.cosine;
  w.block(l * n, m * n, n, n) = -k.sine;
  w.block(m * n, l * n, n, n) = k.sine;
  return w;
}

// E[M^T (x) M*] for the first `streams` columns of the reported angles.
inline CMatrix expected_kron(const GivensAngles& hat, int streams, double eps, double delta) {
  hat.validate();
  if (streams <= 0 || streams > hat.streams) throw std::invalid_argument("stream count exceeds the angle set");
  const int n = hat.num_tx;
  CMatrix k = CMatrix::Identity(n * n, n * n);
  for (int l = 0; l < streams; ++l) {
    const CVector d = expected_phase_kron_diagonal(hat.phi[static_cast<std::size_t>(l)], delta, l, n);
    k = d.asDiagonal() * k;
    for (int m = l + 1; m < n; ++m) {
      const double p = hat.psi[static_cast<std::size_t>(l)][static_cast<std::size_t>(m - l - 1)];
      k = expected_rotation_kron(p, eps, l, m, n).cast<cplx>() * k;
    }
  }
  return k;
}

inline CMatrix hermitian_part(const CMatrix& c) { return 0.5 * (c + c.adjoint()); }

// E[V~* A V~] (L x L) from a precomputed expected_kron.
inline CMatrix expected_outer(const CMatrix& kron, const CMatrix& a, int streams) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || kron.rows() != n * n || kron.cols() != n * n)
    throw std::invalid_argument("dimension mismatch");
  const CVector vec_a = Eigen::Map<const CVector>(a.data(), n * n);
  const CVector v = kron * vec_a;
  const CMatrix full = Eigen::Map<const CMatrix>(v.data(), n, n);
  return hermitian_part(full.topLeftCorner(streams, streams));
}

// C_{u,j} for precoder F_j.
inline CMatrix expected_outer(const GivensAngles& hat, int streams, const QuantizerConfig& q, const CMatrix& f) {
  const CMatrix k = expected_kron(hat, streams, q.epsilon(), q.delta());
  return expected_outer(k, f * f.adjoint(), streams);
}

struct EmpiricalOuter {
  CMatrix mean;
  double trace_stderr = 0.0;  // standard error of trace(mean)
  int samples = 0;
};

// Monte-Carlo E[V~* A V~] with every angle uniform in its bin around the
// reported value.
inline EmpiricalOuter empirical_outer(const GivensAngles& hat, int streams, double eps, double delta, const CMatrix& a,
                                      int num_samples, Rng& rng) {
  if (num_samples < 1) throw std::invalid_argument("num_samples must be positive");
  const GivensAngles base = hat.truncated(streams);
  GivensAngles draw = base;
  CMatrix sum = CMatrix::Zero(streams, streams);
  double tr_sum = 0.0;
  double tr_sq = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    for (std::size_t l = 0; l < base.phi.size(); ++l) {
      for (std::size_t i = 0; i < base.phi[l].size(); ++i)
        draw.phi[l][i] = delta > 0.0 ? uniform(rng, base.phi[l][i] - delta, base.phi[l][i] + delta) : base.phi[l][i];
      for (std::size_t i = 0; i < base.psi[l].size(); ++i)
        draw.psi[l][i] = eps > 0.0 ? uniform(rng, base.psi[l][i] - eps, base.psi[l][i] + eps) : base.psi[l][i];
    }
    const CMatrix v = givens_reconstruct(draw);
    const CMatrix x = v.adjoint() * a * v;
    sum += x;
    const double tr = x.trace().real();
    tr_sum += tr;
    tr_sq += tr * tr;
  }
  EmpiricalOuter out;
  out.samples = num_samples;
  out.mean = hermitian_part(sum / num_samples);
  const double m = tr_sum / num_samples;
  const double var = num_samples > 1 ? std::max(0.0, (tr_sq - num_samples * m * m) / (num_samples - 1)) : 0.0;
  out.trace_stderr = std::sqrt(var / num_samples);
  return out;
}

// R_{u,j} = (1/P) G Sigma C Sigma G*.
inline CMatrix leakage_covariance(const CMatrix& c, const RVector& sigma, const CMatrix& g, double power) {
  if (!(power > 0.0)) throw std::invalid_argument("power normalization must be positive");
  if (c.rows() != sigma.size() || c.cols() != sigma.size() || g.cols() != sigma.size())
    throw std::invalid_argument("dimension mismatch");
  const CMatrix gs = g * sigma.cast<cplx>().asDiagonal();
  return hermitian_part(gs * c * gs.adjoint() / power);
}

}  // namespace mulink
