// SPDX-License-Identifier: Apache-2.0
//
// Post-processing SNR after BD precoding, interference rejection and ZF.
// Each stream carries 1/P[n] signal power at the equalizer output.
#pragma once

#include "mulink/channel.hpp"
#include "mulink/feedback.hpp"
#include "mulink/leakage.hpp"
#include "mulink/precoding.hpp"
#include "mulink/snr_grid.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

// gamma_i[n] = (1/P[n]) / [R_int[n] + sigma^2 G G*]_ii.
inline SnrGrid snr_from_covariance(int user, std::span<const CMatrix> g, std::span<const CMatrix> interference,
                                   double noise_variance, std::span<const double> power) {
  if (g.empty()) throw std::invalid_argument("no carriers");
  if (interference.size() != g.size() || power.size() != g.size())
    throw std::invalid_argument("per-carrier inputs differ in length");
  const int streams = static_cast<int>(g.front().rows());
  SnrGrid out(user, streams, static_cast<int>(g.size()));
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g[n].rows() != streams || g[n].cols() != streams) throw std::invalid_argument("equalizer shape mismatch");
    CMatrix r = noise_variance * g[n] * g[n].adjoint();
    if (interference[n].size() > 0) r += interference[n];
    for (int i = 0; i < streams; ++i) {
      const double d = r(i, i).real();
      if (!(d > 0.0)) throw std::domain_error("zero interference-plus-noise power");
      out.at(i, static_cast<int>(n)) = 1.0 / (power[n] * d);
    }
  }
  return out;
}

// Lazily built E[M^T (x) M*] per (user, L, carrier).
class LeakageModel {
 public:
  explicit LeakageModel(std::span<const FeedbackReport> reports) : reports_(reports) {
    cache_.resize(reports.size());
    for (std::size_t u = 0; u < reports.size(); ++u)
      cache_[u].resize(static_cast<std::size_t>(reports[u].streams) * static_cast<std::size_t>(reports[u].num_carriers()));
  }

  const CMatrix& kron(int user, int streams, int carrier) {
    const FeedbackReport& r = reports_[static_cast<std::size_t>(user)];
    auto& slot = cache_[static_cast<std::size_t>(user)]
                       [static_cast<std::size_t>(streams - 1) * static_cast<std::size_t>(r.num_carriers()) +
                        static_cast<std::size_t>(carrier)];
    if (!slot) {
      slot = expected_kron(r.carriers[static_cast<std::size_t>(carrier)].angles, streams, r.quantizer.epsilon(),
                           r.quantizer.delta());
    }
    return *slot;
  }

 private:
  std::span<const FeedbackReport> reports_;
  std::vector<std::vector<std::optional<CMatrix>>> cache_;
};

// Transmitter-side estimate. With `leakage` null the interuser term is
// dropped; with the bypass quantizer it is exactly zero.
inline std::vector<SnrGrid> estimate_post_snr(std::span<const FeedbackReport> reports, const PrecodingSolution& sol,
                                              double noise_variance, LeakageModel* leakage) {
  const std::size_t users = reports.size();
  const std::size_t carriers = sol.carriers.size();
  std::vector<SnrGrid> out(users);
  std::vector<double> power(carriers);
  for (std::size_t n = 0; n < carriers; ++n) power[n] = sol.carriers[n].power;

  for (std::size_t u = 0; u < users; ++u) {
    const int lu = sol.streams[u];
    if (lu == 0) continue;
    std::vector<CMatrix> g(carriers);
    std::vector<CMatrix> r(carriers);
    const bool estimate = leakage != nullptr && !reports[u].quantizer.bypass;
    for (std::size_t n = 0; n < carriers; ++n) {
      const CarrierDesign& d = sol.carriers[n];
      g[n] = d.g[u];
      if (!estimate) continue;
      const CMatrix& k = leakage->kron(static_cast<int>(u), lu, static_cast<int>(n));
      const RVector sigma = reports[u].sigma(static_cast<int>(n), lu);
      CMatrix acc = CMatrix::Zero(lu, lu);
      for (std::size_t j = 0; j < users; ++j) {
        if (j == u || sol.streams[j] == 0) continue;
        const CMatrix c = expected_outer(k, d.f[j] * d.f[j].adjoint(), lu);
        acc += leakage_covariance(c, sigma, d.g[u], d.power);
      }
      r[n] = std::move(acc);
    }
    out[u] = snr_from_covariance(static_cast<int>(u), g, r, noise_variance, power);
  }
  return out;
}

// Ground truth at the receivers: true channels, B = U~*, G = (B H F)^{-1}.
// Users flagged silent transmit nothing but their precoders still count in P.
inline std::vector<SnrGrid> true_post_snr(const ChannelRealization& channel, const PrecodingSolution& sol,
                                          double noise_variance, const std::vector<bool>& silent = {}) {
  const std::size_t users = sol.streams.size();
  const std::size_t carriers = sol.carriers.size();
  if (channel.users.size() != users) throw std::invalid_argument("user count mismatch");
  std::vector<SnrGrid> out(users);
  std::vector<double> power(carriers);
  for (std::size_t n = 0; n < carriers; ++n) power[n] = sol.carriers[n].power;
  auto is_silent = [&](std::size_t j) { return j < silent.size() && silent[j]; };

  for (std::size_t u = 0; u < users; ++u) {
    const int lu = sol.streams[u];
    if (lu == 0) continue;
    std::vector<CMatrix> g(carriers);
    std::vector<CMatrix> r(carriers);
    for (std::size_t n = 0; n < carriers; ++n) {
      const CMatrix& h = channel.users[u][n];
      const CarrierDesign& d = sol.carriers[n];
      const CMatrix bh = rejection_matrix(h, lu) * h;
      g[n] = zf_equalizer(bh * d.f[u]);
      CMatrix acc = CMatrix::Zero(lu, lu);
      for (std::size_t j = 0; j < users; ++j) {
        if (j == u || sol.streams[j] == 0 || is_silent(j)) continue;
        const CMatrix x = g[n] * bh * d.f[j];
        acc += x * x.adjoint() / d.power;
      }
      r[n] = std::move(acc);
    }
    out[u] = snr_from_covariance(static_cast<int>(u), g, r, noise_variance, power);
  }
  return out;
}

}  // namespace mulink
