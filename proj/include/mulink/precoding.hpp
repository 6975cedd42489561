// SPDX-License-Identifier: Apache-2.0
//
// Block diagonalization from fed-back beamformers, receive-side interference
// rejection and ZF equalization. Transmit power normalization is kept out of
// F: the received signal is scaled by 1/sqrt(P[n]) instead.
#pragma once

#include "mulink/feedback.hpp"
#include "mulink/types.hpp"

#include <Eigen/SVD>

#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

inline constexpr double kNullspaceTolerance = 1e-10;
inline constexpr double kMaxConditionNumber = 1e12;

// B = U~* : Hermitian transpose of the L dominant left singular vectors.
inline CMatrix rejection_matrix(const CMatrix& h, int streams) {
  if (streams <= 0 || streams > h.rows()) throw std::invalid_argument("L must satisfy 1 <= L <= N_rx");
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU);
  const RVector& s = svd.singularValues();
  if (s.size() < streams || !(s(streams - 1) >= kRankThreshold))
    throw InfeasibleConfiguration("L exceeds the channel rank");
  return svd.matrixU().leftCols(streams).adjoint();
}

// Orthonormal basis (columns) of the nullspace of `a`; rank decided
// relative to the largest singular value.
inline CMatrix nullspace_basis(const CMatrix& a, Eigen::Index cols) {
  if (a.rows() == 0) return CMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double tol = kNullspaceTolerance * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

// Per-user transmitter view of one carrier: V^ (N_tx x L_u) and the L_u
// leading singular values. L_u = 0 users have empty matrices.
struct UserCsi {
  CMatrix v;
  RVector sigma;

  int streams() const { return static_cast<int>(v.cols()); }
  CMatrix equivalent() const { return sigma.asDiagonal() * v.adjoint(); }
};

// F_u = N_u P_u with unit-norm columns; empty for users with no streams.
inline std::vector<CMatrix> bd_precoders(std::span<const UserCsi> csi) {
  if (csi.empty()) throw std::invalid_argument("no users");
  const Eigen::Index ntx = csi.front().v.rows();
  std::vector<CMatrix> f(csi.size());
  for (std::size_t u = 0; u < csi.size(); ++u) {
    const int lu = csi[u].streams();
    if (lu == 0) {
      f[u] = CMatrix(ntx, 0);
      continue;
    }
    Eigen::Index others = 0;
    for (std::size_t j = 0; j < csi.size(); ++j)
      if (j != u) others += csi[j].streams();
    CMatrix stacked(others, ntx);
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < csi.size(); ++j) {
      if (j == u || csi[j].streams() == 0) continue;
      if (csi[j].v.rows() != ntx) throw std::invalid_argument("N_tx mismatch between users");
      stacked.middleRows(row, csi[j].streams()) = csi[j].equivalent();
      row += csi[j].streams();
    }
    const CMatrix n = nullspace_basis(stacked, ntx);
    if (n.cols() < lu) throw InfeasibleConfiguration("BD nullspace smaller than the requested streams");
    const CMatrix proj = csi[u].equivalent() * n;
    Eigen::JacobiSVD<CMatrix> svd(proj, Eigen::ComputeFullV);
    f[u] = n * svd.matrixV().leftCols(lu);
    f[u].colwise().normalize();
  }
  return f;
}

// G = (B H F)^{-1}.
inline CMatrix zf_equalizer(const CMatrix& effective) {
  if (effective.rows() != effective.cols() || effective.rows() == 0)
    throw std::invalid_argument("effective channel must be square and nonempty");
  Eigen::JacobiSVD<CMatrix> svd(effective);
  const RVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > kMaxConditionNumber)
    throw InfeasibleConfiguration("effective channel is singular");
  return effective.inverse();
}

inline CMatrix zf_equalizer(const CMatrix& b, const CMatrix& h, const CMatrix& f) { return zf_equalizer(b * h * f); }

inline double power_normalization(std::span<const CMatrix> f) {
  double p = 0.0;
  for (const CMatrix& m : f) p += m.squaredNorm();
  return p;
}

// Transmitter-side design for one carrier. g holds the transmitter's
// estimate of the ZF equalizer, (Sigma V^* F)^{-1}.
struct CarrierDesign {
  std::vector<CMatrix> f;
  std::vector<CMatrix> g;
  double power = 0.0;
};

struct PrecodingSolution {
  std::vector<int> streams;
  std::vector<CarrierDesign> carriers;
};

inline CarrierDesign design_carrier(std::span<const UserCsi> csi) {
  CarrierDesign d;
  d.f = bd_precoders(csi);
  d.power = power_normalization(d.f);
  if (!(d.power > 0.0)) throw std::invalid_argument("no scheduled streams");
  d.g.resize(csi.size());
  for (std::size_t u = 0; u < csi.size(); ++u) {
    if (csi[u].streams() == 0) continue;
    d.g[u] = zf_equalizer(csi[u].equivalent() * d.f[u]);
  }
  return d;
}

// Uses only report data (V^, Sigma), never the channel itself.
inline PrecodingSolution design_precoding(std::span<const FeedbackReport> reports, std::span<const int> streams) {
  if (reports.size() != streams.size()) throw std::invalid_argument("one stream count per report required");
  if (reports.empty()) throw std::invalid_argument("no users");
  PrecodingSolution sol;
  sol.streams.assign(streams.begin(), streams.end());
  const int carriers = reports.front().num_carriers();
  for (std::size_t u = 0; u < reports.size(); ++u) {
    if (reports[u].num_carriers() != carriers) throw std::invalid_argument("carrier count mismatch between reports");
    if (streams[u] < 0 || streams[u] > reports[u].streams) throw std::invalid_argument("L_u outside the report range");
    if (streams[u] > 0 && reports[u].rank_deficient(streams[u]))
      throw InfeasibleConfiguration("rank-deficient carrier in report");
  }
  sol.carriers.reserve(static_cast<std::size_t>(carriers));
  std::vector<UserCsi> csi(reports.size());
  for (int n = 0; n < carriers; ++n) {
    for (std::size_t u = 0; u < reports.size(); ++u) {
      if (streams[u] == 0) {
        csi[u] = {CMatrix(reports[u].num_tx, 0), RVector(0)};
      } else {
        csi[u] = {reports[u].beamformer(n, streams[u]), reports[u].sigma(n, streams[u])};
      }
    }
    sol.carriers.push_back(design_carrier(csi));
  }
  return sol;
}

}  // namespace mulink
